//! Monte-Carlo BER campaigns.
//!
//! Frames are simulated in fixed-size chunks. Frame `f` of grid point `p`
//! draws everything from the streams of trial `(p << 40) | f`, and the
//! stopping rule is checked only between chunks, so the counts depend on
//! the seed alone and never on the worker count.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use relay_tcm::channel::{draw_realization, phase1, phase2, ChannelParams};
use relay_tcm::decoder::{ideal_ml_decode, relay_decode, NearMlDecoder};
use relay_tcm::pepbounds::loglog_slope;
use relay_tcm::rng::{Link, TrialStreams};
use relay_tcm::trellis::{encode_path, path_bits, LabelledTrellis, Which};
use serde::Serialize;

use crate::config::{DecoderKind, SweepConfig};
use crate::error::{HarnessError, Result};

/// Frames simulated between two checks of the stopping rule.
pub const CHUNK: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub es_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub stderr: f64,
    /// Kept out of the CSV so that reruns compare byte for byte.
    #[serde(skip)]
    pub wall_time_s: f64,
    pub seed: u64,
}

impl SweepRecord {
    pub fn new(es_db: f64, bits: u64, errors: u64, seed: u64, wall_time_s: f64) -> Self {
        let ber = if bits == 0 { 0.0 } else { errors as f64 / bits as f64 };
        let stderr = if bits == 0 {
            0.0
        } else {
            (ber * (1.0 - ber) / bits as f64).sqrt()
        };
        SweepRecord {
            es_db,
            bits,
            errors,
            ber,
            stderr,
            wall_time_s,
            seed,
        }
    }
}

/// Encoder, channel and decoders for one code.
struct Pipeline<'a> {
    lt: &'a LabelledTrellis<f64>,
    near: NearMlDecoder<'a, f64>,
    payload_bits: usize,
    noiseless: bool,
}

impl<'a> Pipeline<'a> {
    fn new(lt: &'a LabelledTrellis<f64>, cfg: &SweepConfig) -> Self {
        Pipeline {
            lt,
            near: NearMlDecoder::new(lt),
            payload_bits: cfg.payload_bits,
            noiseless: cfg.noiseless,
        }
    }

    /// Bit errors of one frame under each requested destination decoder.
    /// All decoders see the same data, fades and noise.
    fn frame(
        &self,
        params: &ChannelParams<f64>,
        streams: &TrialStreams,
        kinds: &[DecoderKind],
    ) -> Result<Vec<u64>> {
        let t = self.lt.trellis();
        let mut data = streams.get(Link::Data);
        let bits: Vec<u8> = (0..self.payload_bits).map(|_| data.random::<bool>() as u8).collect();
        let path = encode_path(t, &bits)?;
        let mut h = draw_realization(params, path.len(), streams);
        if self.noiseless {
            h = h.without_noise();
        }
        let amp = params.amplitude();
        let xs1 = params.scale(&self.lt.symbols(&path, Which::S1));
        let xs2 = params.scale(&self.lt.symbols(&path, Which::S2));
        let (y_r, y_d1) = phase1(&xs1, &h)?;
        let payload = self.payload_bits / t.bits_per_branch();
        kinds
            .iter()
            .map(|kind| {
                let decoded = match kind {
                    DecoderKind::NearMl => {
                        let relay = relay_decode(self.lt, amp, &y_r, &h.h_sr)?;
                        let xr = params.scale(&self.lt.symbols(&relay.path, Which::R));
                        let y_d2 = phase2(&xs2, &xr, &h)?;
                        self.near.decode(amp, &y_d1, &y_d2, &h)?
                    }
                    DecoderKind::IdealMl => {
                        let xr = params.scale(&self.lt.symbols(&path, Which::R));
                        let y_d2 = phase2(&xs2, &xr, &h)?;
                        ideal_ml_decode(self.lt, amp, &y_d1, &y_d2, &h)?
                    }
                };
                let got = path_bits(t, &decoded.path, payload);
                Ok(got.iter().zip(&bits).filter(|(a, b)| a != b).count() as u64)
            })
            .collect()
    }
}

/// Runs every grid point with each decoder in `kinds` on common random
/// numbers. A point stops when every decoder has `max_bit_errors` errors or
/// `max_trials` frames are spent.
fn sweep(cfg: &SweepConfig, kinds: &[DecoderKind]) -> Result<Vec<Vec<SweepRecord>>> {
    cfg.validate()?;
    let lt = cfg.trellis()?;
    let pipe = Pipeline::new(&lt, cfg);
    let mut out = vec![Vec::with_capacity(cfg.es_db.len()); kinds.len()];
    for (pi, &es) in cfg.es_db.iter().enumerate() {
        let params = cfg.channel.params(es)?;
        let start = Instant::now();
        let mut frames = 0u64;
        let mut errors = vec![0u64; kinds.len()];
        while frames < cfg.max_trials && errors.iter().any(|&e| e < cfg.max_bit_errors) {
            let n = CHUNK.min(cfg.max_trials - frames);
            let chunk = (frames..frames + n)
                .into_par_iter()
                .map(|f| {
                    let streams = TrialStreams::new(cfg.seed, ((pi as u64) << 40) | f);
                    pipe.frame(&params, &streams, kinds)
                })
                .collect::<Result<Vec<_>>>()?;
            for row in chunk {
                for (acc, e) in errors.iter_mut().zip(row) {
                    *acc += e;
                }
            }
            frames += n;
        }
        let bits = frames * cfg.payload_bits as u64;
        let wall = start.elapsed().as_secs_f64();
        for (k, &e) in errors.iter().enumerate() {
            out[k].push(SweepRecord::new(es, bits, e, cfg.seed, wall));
        }
    }
    Ok(out)
}

/// End-to-end BER of the configured code and destination decoder.
pub fn run_ber_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    Ok(sweep(cfg, &[cfg.decoder])?.remove(0))
}

/// Uncoded M-PSK: the relay decides symbol by symbol and the destination
/// runs the near-ML search on the one-state product trellis.
pub fn run_uncoded_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    if !cfg.is_uncoded() {
        return Err(HarnessError::config(format!(
            "simulate-uncoded needs code = \"uncoded\", got `{}`",
            cfg.code
        )));
    }
    run_ber_sweep(cfg)
}

/// Negated least-squares slope of `log10 BER` against `E_S/10`, fitted on
/// the points whose BER lies within `top_decades` decades of the lowest
/// nonzero BER.
pub fn estimate_diversity(records: &[SweepRecord], top_decades: u32) -> Result<f64> {
    let live: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.errors > 0)
        .map(|r| (r.es_db, r.ber))
        .collect();
    let floor = live.iter().map(|p| p.1.log10()).fold(f64::INFINITY, f64::min);
    let fit: Vec<(f64, f64)> = live
        .into_iter()
        .filter(|p| p.1.log10() <= floor + top_decades as f64)
        .collect();
    if fit.len() < 3 {
        return Err(HarnessError::Runtime(format!(
            "diversity fit needs 3 points with errors in the top {top_decades} decades, found {}",
            fit.len()
        )));
    }
    Ok(loglog_slope(&fit))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedRecord {
    pub es_db: f64,
    pub ber_near_ml: f64,
    pub ber_ideal_ml: f64,
    pub errors_near_ml: u64,
    pub errors_ideal_ml: u64,
    pub bits: u64,
    /// `E_S` the near-ML scheme spends beyond the ideal link for the same
    /// BER, read off the ideal curve; `None` if that BER is not bracketed.
    pub gap_db: Option<f64>,
}

/// `E_S` at which the piecewise log-linear curve through `pts` reaches
/// `ber`. Points must be sorted by `E_S`.
pub fn es_at_ber(pts: &[(f64, f64)], ber: f64) -> Option<f64> {
    let target = ber.log10();
    pts.windows(2).find_map(|w| {
        let (x0, y0) = (w[0].0, w[0].1.log10());
        let (x1, y1) = (w[1].0, w[1].1.log10());
        let (lo, hi) = (y0.min(y1), y0.max(y1));
        if y0 == y1 || target < lo || target > hi {
            return None;
        }
        Some(x0 + (target - y0) * (x1 - x0) / (y1 - y0))
    })
}

/// Near-ML with a decoding relay against the ideal-link ML decoder, both on
/// the same frames.
pub fn compare_ideal_vs_nonideal(cfg: &SweepConfig) -> Result<Vec<PairedRecord>> {
    let runs = sweep(cfg, &[DecoderKind::NearMl, DecoderKind::IdealMl])?;
    let (near, ideal) = (&runs[0], &runs[1]);
    let mut curve: Vec<(f64, f64)> = ideal
        .iter()
        .filter(|r| r.errors > 0)
        .map(|r| (r.es_db, r.ber))
        .collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(near
        .iter()
        .zip(ideal)
        .map(|(n, i)| PairedRecord {
            es_db: n.es_db,
            ber_near_ml: n.ber,
            ber_ideal_ml: i.ber,
            errors_near_ml: n.errors,
            errors_ideal_ml: i.errors,
            bits: n.bits,
            gap_db: (n.errors > 0)
                .then(|| es_at_ber(&curve, n.ber).map(|e| n.es_db - e))
                .flatten(),
        })
        .collect())
}
