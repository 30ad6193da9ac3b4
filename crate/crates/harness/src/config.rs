//! Run configuration, read from TOML.
//!
//! A file may start from a named preset with `preset = "..."`; every other
//! key then overrides the preset value. Tables are merged key by key.

use std::path::{Path, PathBuf};

use relay_tcm::capacity::McConfig;
use relay_tcm::channel::{ChannelParams, FadingMode};
use relay_tcm::constellation::LabellingScheme;
use relay_tcm::trellis::{catalog, catalog_names, uncoded, LabelledTrellis};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Link variances in dB and the fading model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub sigma2_sd_db: f64,
    pub sigma2_sr_db: f64,
    pub sigma2_rd_db: f64,
    #[serde(default)]
    pub fading: FadingMode,
}

impl ChannelConfig {
    pub fn new(sd_db: f64, sr_db: f64, rd_db: f64) -> Self {
        ChannelConfig {
            sigma2_sd_db: sd_db,
            sigma2_sr_db: sr_db,
            sigma2_rd_db: rd_db,
            fading: FadingMode::Iid,
        }
    }

    pub fn params(&self, es_db: f64) -> Result<ChannelParams<f64>> {
        let p = ChannelParams::from_db(self.sigma2_sd_db, self.sigma2_sr_db, self.sigma2_rd_db, es_db)
            .and_then(|p| p.with_fading(self.fading))
            .map_err(|e| HarnessError::config(format!("channel: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    #[default]
    NearMl,
    /// Destination decoder for a relay that never errs; the relay then
    /// forwards the true path.
    IdealMl,
}

fn default_payload() -> usize {
    120
}

fn default_errors() -> u64 {
    100
}

/// One BER campaign over an `E_S` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Catalog name, path to a trellis file, or `"uncoded"`.
    pub code: String,
    /// Constellation size of the uncoded scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Labelling family of the uncoded scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labelling: Option<LabellingScheme>,
    #[serde(default)]
    pub decoder: DecoderKind,
    pub channel: ChannelConfig,
    pub es_db: Vec<f64>,
    /// Frames per grid point at most.
    pub max_trials: u64,
    /// A point stops once this many bit errors are counted.
    #[serde(default = "default_errors")]
    pub max_bit_errors: u64,
    #[serde(default = "default_payload")]
    pub payload_bits: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Sanity hook: drop all noise, keep the fades.
    #[serde(default)]
    pub noiseless: bool,
}

pub const PRESETS: &[&str] = &["fig11_text", "fig11_caption"];

impl SweepConfig {
    /// Built-in campaigns. The two fig11 presets differ only in the
    /// relay-link variances (15 dB and 10 dB).
    pub fn preset(name: &str) -> Result<Self> {
        let relay_db = match name {
            "fig11_text" => 15.0,
            "fig11_caption" => 10.0,
            _ => {
                return Err(HarnessError::config(format!(
                    "unknown preset `{name}` (known: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(SweepConfig {
            code: "four_state_8psk".into(),
            m: None,
            labelling: None,
            decoder: DecoderKind::NearMl,
            channel: ChannelConfig::new(0.0, relay_db, relay_db),
            es_db: (0..=7).map(|k| 2.0 * k as f64).collect(),
            max_trials: 100_000,
            max_bit_errors: default_errors(),
            payload_bits: default_payload(),
            seed: 1,
            output: None,
            noiseless: false,
        })
    }

    pub fn is_uncoded(&self) -> bool {
        self.code == "uncoded"
    }

    /// The trellis the campaign runs on.
    pub fn trellis(&self) -> Result<LabelledTrellis<f64>> {
        if self.is_uncoded() {
            let m = self
                .m
                .ok_or_else(|| HarnessError::config("uncoded runs need `m`"))?;
            let scheme = self.labelling.unwrap_or(LabellingScheme::Constant);
            return uncoded(m, scheme).map_err(|e| HarnessError::config(e.to_string()));
        }
        if self.m.is_some() || self.labelling.is_some() {
            return Err(HarnessError::config(
                "`m` and `labelling` apply to uncoded runs only; coded runs take labels from the trellis",
            ));
        }
        load_code(&self.code)
    }

    pub fn validate(&self) -> Result<()> {
        check_grid(&self.es_db)?;
        if self.max_trials == 0 || self.max_bit_errors == 0 {
            return Err(HarnessError::config("max_trials and max_bit_errors must be positive"));
        }
        let lt = self.trellis()?;
        let bpb = lt.trellis().bits_per_branch();
        if self.payload_bits == 0 || !self.payload_bits.is_multiple_of(bpb) {
            return Err(HarnessError::config(format!(
                "payload_bits = {} is not a positive multiple of {bpb}",
                self.payload_bits
            )));
        }
        for &es in &self.es_db {
            self.channel.params(es)?;
        }
        Ok(())
    }
}

/// Catalog code, or a trellis file on disk.
pub fn load_code(code: &str) -> Result<LabelledTrellis<f64>> {
    if catalog_names().any(|n| n == code) {
        return Ok(catalog(code)?);
    }
    let path = Path::new(code);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: code.into(),
            source,
        })?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(code);
        return LabelledTrellis::from_text(name, &text)
            .map_err(|e| HarnessError::config(format!("{code}: {e}")));
    }
    Err(HarnessError::config(format!(
        "`{code}` is neither a catalog code ({}) nor a trellis file",
        catalog_names().collect::<Vec<_>>().join(", ")
    )))
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(HarnessError::config("es_db grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(HarnessError::config("es_db grid has a non-finite entry"));
    }
    Ok(())
}

fn default_max_pairs() -> usize {
    usize::MAX
}

/// Per-pair PEP bounds, optionally checked against simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub code: String,
    pub channel: ChannelConfig,
    pub es_db: Vec<f64>,
    /// Monte-Carlo trials per pair and point; 0 skips the simulation.
    #[serde(default)]
    pub mc_trials: u64,
    #[serde(default = "default_max_pairs")]
    pub max_pairs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl BoundsConfig {
    pub fn validate(&self) -> Result<()> {
        check_grid(&self.es_db)?;
        load_code(&self.code)?;
        for &es in &self.es_db {
            self.channel.params(es)?;
        }
        Ok(())
    }
}

fn default_beta_points() -> usize {
    21
}

/// Capacity bounds of one PSK size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub m: usize,
    pub channel: ChannelConfig,
    pub es_db: Vec<f64>,
    #[serde(default)]
    pub n_fade: Option<usize>,
    #[serde(default)]
    pub n_noise: Option<usize>,
    #[serde(default = "default_beta_points")]
    pub beta_points: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl CapacityConfig {
    pub fn mc(&self) -> McConfig {
        let d = McConfig::default();
        McConfig {
            n_fade: self.n_fade.unwrap_or(d.n_fade),
            n_noise: self.n_noise.unwrap_or(d.n_noise),
            seed: self.seed,
        }
    }

    pub fn beta_grid(&self) -> Vec<f64> {
        let n = self.beta_points.max(1);
        if n == 1 {
            return vec![0.0];
        }
        (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        check_grid(&self.es_db)?;
        relay_tcm::constellation::make_psk::<f64>(self.m)
            .map_err(|e| HarnessError::config(e.to_string()))?;
        let mc = self.mc();
        if mc.n_fade < relay_tcm::capacity::MIN_SAMPLES || mc.n_noise == 0 {
            return Err(HarnessError::config(format!(
                "need n_fade >= {} and n_noise >= 1",
                relay_tcm::capacity::MIN_SAMPLES
            )));
        }
        for &es in &self.es_db {
            self.channel.params(es)?;
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parses TOML text, applying a `preset` key when present.
pub fn parse_config<C: DeserializeOwned>(text: &str) -> Result<C> {
    let mut value: toml::Value =
        toml::from_str(text).map_err(|e| HarnessError::config(e.to_string()))?;
    let preset = value
        .as_table_mut()
        .and_then(|t| t.remove("preset"))
        .map(|p| {
            p.as_str()
                .map(str::to_string)
                .ok_or_else(|| HarnessError::config("`preset` must be a string"))
        })
        .transpose()?;
    if let Some(name) = preset {
        let mut base = toml::Value::try_from(SweepConfig::preset(&name)?)
            .map_err(|e| HarnessError::config(e.to_string()))?;
        merge(&mut base, value);
        value = base;
    }
    value
        .try_into()
        .map_err(|e: toml::de::Error| HarnessError::config(e.to_string()))
}

pub fn read_config<C: DeserializeOwned>(path: &Path) -> Result<C> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        HarnessError::config(format!("cannot read {}: {e}", path.display()))
    })?;
    parse_config(&text)
}
