//! Analytic reports: code metrics, PEP bounds and capacity bounds.

use rayon::prelude::*;
use relay_tcm::capacity::{cc_bounds, direct_bounds, gaussian_bounds, Alphabets, CapacityPoint};
use relay_tcm::codemetrics::{code_report, min_diversity_pairs, CodeReport};
use relay_tcm::pepbounds::{embed_pair, mc_pep, pep_report};
use relay_tcm::trellis::default_horizon;
use serde::Serialize;

use crate::config::{load_code, BoundsConfig, CapacityConfig, ChannelConfig};
use crate::error::Result;

/// Metrics of a code. `gamma` defaults to `σ²_sd/σ²_rd` of `channel`.
pub fn analyze(code: &str, gamma: Option<f64>, channel: &ChannelConfig) -> Result<CodeReport> {
    let lt = load_code(code)?;
    let gamma = match gamma {
        Some(g) => g,
        None => channel.params(0.0)?.gamma().get(),
    };
    Ok(code_report(&lt, gamma, default_horizon(lt.trellis()))?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub pair_id: usize,
    pub es_db: f64,
    pub bound_full: f64,
    pub bound_dominant: Option<f64>,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
}

/// Bounds for each minimum-diversity pair of the code, embedded in
/// terminated paths, and optionally the simulated PEP beside them.
pub fn run_bounds(cfg: &BoundsConfig) -> Result<Vec<BoundsRow>> {
    cfg.validate()?;
    let lt = load_code(&cfg.code)?;
    let t = lt.trellis();
    let pairs = min_diversity_pairs(&lt, default_horizon(t))?;
    let base = cfg.channel.params(cfg.es_db[0])?;
    let jobs: Vec<_> = pairs.pairs.iter().take(cfg.max_pairs).enumerate().collect();
    let per_pair = jobs
        .into_par_iter()
        .map(|(id, pair)| {
            let (a, b) = embed_pair(t, pair)?;
            let report = pep_report(&lt, id, &a, &b, &base, &cfg.es_db)?;
            report
                .snr_grid
                .iter()
                .enumerate()
                .map(|(pi, pt)| {
                    let mc = if cfg.mc_trials > 0 {
                        let seed = cfg.seed ^ ((id as u64) << 32 | pi as u64);
                        let p = base.with_es_db(pt.es_db);
                        Some(mc_pep(&lt, &a, &b, &p, cfg.mc_trials, seed)?)
                    } else {
                        None
                    };
                    Ok(BoundsRow {
                        pair_id: id,
                        es_db: pt.es_db,
                        bound_full: pt.bound_full,
                        bound_dominant: pt.bound_dominant,
                        mc_estimate: mc.map(|m| m.p),
                        mc_stderr: mc.map(|m| m.stderr),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_pair.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityRow {
    pub kind: &'static str,
    pub es_db: f64,
    pub value: f64,
    pub stderr: f64,
    pub beta_star: Option<f64>,
}

impl From<CapacityPoint> for CapacityRow {
    fn from(p: CapacityPoint) -> Self {
        CapacityRow {
            kind: p.kind.name(),
            es_db: p.es_db,
            value: p.value,
            stderr: p.stderr,
            beta_star: p.beta_star,
        }
    }
}

/// All six capacity curves at each grid point.
pub fn run_capacity(cfg: &CapacityConfig) -> Result<Vec<CapacityRow>> {
    cfg.validate()?;
    let alph = Alphabets::psk(cfg.m)?;
    let mc = cfg.mc();
    let betas = cfg.beta_grid();
    let mut rows = Vec::with_capacity(6 * cfg.es_db.len());
    for &es in &cfg.es_db {
        let p = cfg.channel.params(es)?;
        let (cl, cu) = cc_bounds(&p, &alph, &mc)?;
        let (gl, gu) = gaussian_bounds(&p, &betas, &mc)?;
        let (dc, dg) = direct_bounds(&p, &alph, &mc)?;
        rows.extend([cl, cu, gl, gu, dc, dg].map(CapacityRow::from));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyze_catalog_code() {
        let r = analyze("four_state_8psk", None, &ChannelConfig::new(0.0, 15.0, 15.0)).unwrap();
        assert_eq!(r.n_states, 4);
        assert!((r.gamma - 10f64.powf(-1.5)).abs() < 1e-12);
        assert!(r.min_diversity_pairs > 0);
        assert!(analyze("nope", None, &ChannelConfig::new(0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn bounds_rows_cover_pairs_and_grid() {
        let cfg = BoundsConfig {
            code: "example1_4psk".into(),
            channel: ChannelConfig::new(0.0, 15.0, 15.0),
            es_db: vec![0.0, 10.0],
            mc_trials: 200,
            max_pairs: 3,
            seed: 1,
            output: None,
        };
        let rows = run_bounds(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert!(r.bound_full > 0.0 && r.bound_full <= 1.0);
            assert!(r.mc_estimate.is_some());
        }
        assert!(rows[1].bound_full < rows[0].bound_full);
    }
}
