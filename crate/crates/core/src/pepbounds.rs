//! Pairwise error probability bounds for the near-ML destination decoder
//! and a genie Monte-Carlo estimate to compare them with.
//!
//! All symbol differences are taken on the scaled constellation, so each
//! `|Δ|²` carries a factor `E_S`.

use std::collections::VecDeque;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{draw_realization, phase1, phase2, ChannelParams};
use crate::codemetrics::{eta_set, eta_union, PathPair};
use crate::constellation::{Constellation, LabellingTriple};
use crate::decoder::{relay_decode, NearMlDecoder};
use crate::error::{Error, Result};
use crate::rng::TrialStreams;
use crate::scalar::Real;
use crate::trellis::{code_unmerged_length, default_horizon, LabelledTrellis, Path, Trellis, Which};

/// `½ exp(-‖x1 - x2‖²/4 - c/2)`, clipped to `[0, 1]`.
///
/// Bounds the probability that the metric rule with offset `c` prefers
/// message 2 when message 1 was sent over `CN(0, I)` noise.
pub fn lemma1_bound<T: Real>(x1: &[Complex<T>], x2: &[Complex<T>], c: T) -> Result<T> {
    if x1.len() != x2.len() {
        return Err(Error::LengthMismatch {
            left: x1.len(),
            right: x2.len(),
        });
    }
    let d: T = x1.iter().zip(x2).map(|(a, b)| (a - b).norm_sqr()).sum();
    let v = T::lit(0.5) * (-(d / T::lit(4.0)) - c / T::lit(2.0)).exp();
    Ok(v.max(T::zero()).min(T::one()))
}

/// Gaussian tail `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// `exp(-Σ |h_sr (x_s1(P_S) - x_s1(P_R))|² / 4)`, the bound used for the
/// probability that the relay decodes `P_R` when `P_S` was sent.
pub fn relay_error_bound<T: Real>(
    h_sr: &[Complex<T>],
    xs1_sent: &[Complex<T>],
    xs1_decoded: &[Complex<T>],
) -> T {
    let d: T = h_sr
        .iter()
        .zip(xs1_sent.iter().zip(xs1_decoded))
        .map(|(h, (a, b))| (h * (a - b)).norm_sqr())
        .sum();
    (-d / T::lit(4.0)).exp()
}

fn check_pair(t: &Trellis, p_s: &Path, p_t: &Path) -> Result<()> {
    if p_s.len() != p_t.len() {
        return Err(Error::LengthMismatch {
            left: p_s.len(),
            right: p_t.len(),
        });
    }
    if p_s == p_t {
        return Err(Error::IdenticalPaths);
    }
    for p in [p_s, p_t] {
        if !p.is_terminated(t) {
            return Err(Error::InvalidParameter(
                "bound needs paths that start and end in state 0".into(),
            ));
        }
    }
    Ok(())
}

/// Variances scaled by `E_S`.
struct Snr<T> {
    sd: T,
    sr: T,
    rd: T,
}

impl<T: Real> Snr<T> {
    fn of(p: &ChannelParams<T>) -> Self {
        let es = p.es();
        Snr {
            sd: p.sigma2_sd * es,
            sr: p.sigma2_sr * es,
            rd: p.sigma2_rd * es,
        }
    }
}

fn d2<T: Real>(lt: &LabelledTrellis<T>, e: usize, f: usize, which: Which) -> T {
    (lt.symbol(e, which) - lt.symbol(f, which)).norm_sqr()
}

/// Terms of the averaged bound over relay path pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FullBound<T> {
    /// Sum over every `(P_R, P̃_R)` pair of terminated paths.
    pub all_pairs: T,
    /// First term plus the pairs with `P_R ≠ P_S` and `P̃_R ≠ P̃_S`.
    pub printed: T,
    /// The `(P_R, P̃_R) = (P_S, P̃_S)` term alone.
    pub first_term: T,
}

/// Averaged PEP bound `Pr{P_S → P̃_S}` for the near-ML decoder, summed over
/// all relay decisions `(P_R, P̃_R)`.
///
/// Each term is `Π_i [1/(1 + σsd²|Δs1|²/4)] [1/(1 + (σsd²|Δs2|² + σrd²|Δr|²)/4)]
/// [1/(1 + σsr²(|x_s1(P̃_R) - x_s1(P̃_S)|² + |x_s1(P_S) - x_s1(P_R)|²)/8)]`
/// with `Δr` taken between `P_R` and `P̃_R`. The sum over pairs factors
/// along the trellis and is evaluated exactly by a forward recursion on
/// state pairs.
pub fn pep_full<T: Real>(
    lt: &LabelledTrellis<T>,
    p_s: &Path,
    p_t: &Path,
    params: &ChannelParams<T>,
) -> Result<FullBound<T>> {
    let t = lt.trellis();
    check_pair(t, p_s, p_t)?;
    let snr = Snr::of(params);
    let (four, eight) = (T::lit(4.0), T::lit(8.0));
    let one = T::one();
    let len = p_s.len();
    // factor at position i for relay edges (e, f) of (P_R, P̃_R)
    let factor = |i: usize, e: usize, f: usize| {
        let (s, st) = (p_s.edges[i], p_t.edges[i]);
        let a = one / (one + snr.sd * d2(lt, s, st, Which::S1) / four);
        let b = one
            / (one + (snr.sd * d2(lt, s, st, Which::S2) + snr.rd * d2(lt, e, f, Which::R)) / four);
        let c = one
            / (one + snr.sr * (d2(lt, f, st, Which::S1) + d2(lt, s, e, Which::S1)) / eight);
        a * b * c
    };

    let n = t.n_states();
    let k = t.branches();
    // all pairs
    let mut alpha = vec![T::zero(); n * n];
    alpha[0] = one;
    let mut log_scale = T::zero();
    for i in 0..len {
        let mut next = vec![T::zero(); n * n];
        for a in 0..n {
            for b in 0..n {
                let w = alpha[a * n + b];
                if w == T::zero() {
                    continue;
                }
                for ua in 0..k {
                    let e = t.edge_id(a, ua);
                    let to_a = t.edge(e).to;
                    for ub in 0..k {
                        let f = t.edge_id(b, ub);
                        let to = to_a * n + t.edge(f).to;
                        next[to] = next[to] + w * factor(i, e, f);
                    }
                }
            }
        }
        let top = next.iter().copied().fold(T::zero(), T::max);
        if top > T::zero() {
            next.iter_mut().for_each(|x| *x = *x / top);
            log_scale = log_scale + top.ln();
        }
        alpha = next;
    }
    let all_pairs = alpha[0] * log_scale.exp();

    // one side pinned to the transmitted/competing path
    let pinned = |pin_relay: bool| -> T {
        let mut alpha = vec![T::zero(); n];
        alpha[0] = one;
        let mut log_scale = T::zero();
        for i in 0..len {
            let mut next = vec![T::zero(); n];
            for s in 0..n {
                let w = alpha[s];
                if w == T::zero() {
                    continue;
                }
                for u in 0..k {
                    let g = t.edge_id(s, u);
                    let to = t.edge(g).to;
                    let v = if pin_relay {
                        factor(i, p_s.edges[i], g)
                    } else {
                        factor(i, g, p_t.edges[i])
                    };
                    next[to] = next[to] + w * v;
                }
            }
            let top = next.iter().copied().fold(T::zero(), T::max);
            if top > T::zero() {
                next.iter_mut().for_each(|x| *x = *x / top);
                log_scale = log_scale + top.ln();
            }
            alpha = next;
        }
        alpha[0] * log_scale.exp()
    };
    let relay_correct = pinned(true);
    let competitor_relay_correct = pinned(false);
    let first_term: T = (0..len)
        .map(|i| factor(i, p_s.edges[i], p_t.edges[i]))
        .fold(one, |acc, x| acc * x);
    let printed = all_pairs - relay_correct - competitor_relay_correct + first_term + first_term;
    Ok(FullBound {
        all_pairs,
        printed: printed.max(first_term),
        first_term,
    })
}

/// Dominant high-SNR term with the unspecified constant set to 1:
/// `Π_{η_s1} 1/(σsd²|Δs1|²) · Π_{η_s2 ∪ η_r} 1/(σsd²|Δs2|² + σrd²|Δr|²)`.
///
/// Only its slope and ratios are meaningful. The pair must have
/// `|η_s1| = |η_s2 ∪ η_r|` equal to the unmerged length of the code.
pub fn pep_dominant<T: Real>(
    lt: &LabelledTrellis<T>,
    p_s: &Path,
    p_t: &Path,
    params: &ChannelParams<T>,
) -> Result<T> {
    let u = code_unmerged_length(lt.trellis(), default_horizon(lt.trellis()))?;
    let e1 = eta_set(lt, p_s, p_t, Which::S1)?;
    let eg = eta_union(lt, p_s, p_t)?;
    if e1.len() != u || eg.len() != u {
        return Err(Error::NotMinimumDiversity);
    }
    Ok(dominant_product(lt, p_s, p_t, params, &e1, &eg))
}

fn dominant_product<T: Real>(
    lt: &LabelledTrellis<T>,
    p_s: &Path,
    p_t: &Path,
    params: &ChannelParams<T>,
    e1: &[usize],
    eg: &[usize],
) -> T {
    let snr = Snr::of(params);
    let one = T::one();
    let mut v = one;
    for &i in e1 {
        v = v / (snr.sd * d2(lt, p_s.edges[i], p_t.edges[i], Which::S1));
    }
    for &i in eg {
        let (s, st) = (p_s.edges[i], p_t.edges[i]);
        v = v / (snr.sd * d2(lt, s, st, Which::S2) + snr.rd * d2(lt, s, st, Which::R));
    }
    v
}

/// Averaged bound when the relay always decodes correctly:
/// `Π_i 1/(1 + σsd²|Δs1|²/4) · 1/(1 + (σsd²|Δs2|² + σrd²|Δr|²)/4)`.
pub fn pep_ideal_full<T: Real>(
    lt: &LabelledTrellis<T>,
    p_s: &Path,
    p_t: &Path,
    params: &ChannelParams<T>,
) -> Result<T> {
    if p_s.len() != p_t.len() {
        return Err(Error::LengthMismatch {
            left: p_s.len(),
            right: p_t.len(),
        });
    }
    let snr = Snr::of(params);
    let (one, four) = (T::one(), T::lit(4.0));
    Ok(p_s
        .edges
        .iter()
        .zip(&p_t.edges)
        .map(|(&s, &st)| {
            one / (one + snr.sd * d2(lt, s, st, Which::S1) / four)
                / (one + (snr.sd * d2(lt, s, st, Which::S2) + snr.rd * d2(lt, s, st, Which::R)) / four)
        })
        .fold(one, |a, x| a * x))
}

/// High-SNR form of [`pep_ideal_full`], constant set to 1. Defined for any
/// pair with nonempty `η_s1` and `η_s2 ∪ η_r`.
pub fn pep_ideal_dominant<T: Real>(
    lt: &LabelledTrellis<T>,
    p_s: &Path,
    p_t: &Path,
    params: &ChannelParams<T>,
) -> Result<T> {
    let e1 = eta_set(lt, p_s, p_t, Which::S1)?;
    let eg = eta_union(lt, p_s, p_t)?;
    if e1.is_empty() {
        return Err(Error::EmptyIndexSet("T_S1"));
    }
    if eg.is_empty() {
        return Err(Error::EmptyIndexSet("T_S2/T_R"));
    }
    Ok(dominant_product(lt, p_s, p_t, params, &e1, &eg))
}

/// Uncoded scheme bound for message `a` decided as `ā`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncodedPep<T> {
    /// Relay correct on both hypotheses; diversity two.
    pub leading: T,
    /// Sum over every relay decision pair.
    pub full: T,
}

pub fn uncoded_pep_bound<T: Real>(
    labels: &LabellingTriple,
    constellation: &Constellation<T>,
    params: &ChannelParams<T>,
    a: usize,
    a_bar: usize,
) -> Result<UncodedPep<T>> {
    let m = constellation.size();
    if a == a_bar {
        return Err(Error::SameMessage);
    }
    for x in [a, a_bar] {
        if x >= m {
            return Err(Error::IndexOutOfRange { index: x, size: m });
        }
    }
    let snr = Snr::of(params);
    let pts = constellation.points();
    let sym = |l: &crate::constellation::Labelling, k: usize| pts[l.apply(k)];
    let dist = |l: &crate::constellation::Labelling, i: usize, j: usize| (sym(l, i) - sym(l, j)).norm_sqr();
    let (one, four, eight) = (T::one(), T::lit(4.0), T::lit(8.0));
    let f1 = one / (one + snr.sd * dist(&labels.s1, a, a_bar) / four);
    let ds2 = snr.sd * dist(&labels.s2, a, a_bar);
    let mut full = T::zero();
    for j in 0..m {
        for l in 0..m {
            let f2 = one / (one + (ds2 + snr.rd * dist(&labels.r, j, l)) / four);
            let f3 = one
                / (one + snr.sr * (dist(&labels.s1, a, j) + dist(&labels.s1, a_bar, l)) / eight);
            full = full + f1 * f2 * f3;
        }
    }
    let leading = f1 / (one + (ds2 + snr.rd * dist(&labels.r, a, a_bar)) / four);
    Ok(UncodedPep { leading, full })
}

/// Extends a diverging/remerging pair to terminated paths: a shortest
/// prefix from state 0, the pair, then zero inputs back to state 0.
pub fn embed_pair(t: &Trellis, pair: &PathPair) -> Result<(Path, Path)> {
    let start = pair.p1.start;
    if pair.p2.start != start || !pair.p1.is_connected(t) || !pair.p2.is_connected(t) {
        return Err(Error::InvalidParameter("pair must leave a common state".into()));
    }
    let end = pair.p1.end_state(t);
    if pair.p2.end_state(t) != end {
        return Err(Error::InvalidParameter("pair must remerge".into()));
    }
    let mut prev = vec![usize::MAX; t.n_states()];
    let mut seen = vec![false; t.n_states()];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(s) = queue.pop_front() {
        for u in 0..t.branches() {
            let e = t.edge_id(s, u);
            let to = t.edge(e).to;
            if !seen[to] {
                seen[to] = true;
                prev[to] = e;
                queue.push_back(to);
            }
        }
    }
    if !seen[start] {
        return Err(Error::InvalidParameter(format!("state {start} is unreachable")));
    }
    let mut prefix = Vec::new();
    let mut s = start;
    while s != 0 {
        let e = prev[s];
        prefix.push(e);
        s = t.edge(e).from;
    }
    prefix.reverse();
    let mut suffix = Vec::new();
    let mut s = end;
    while s != 0 {
        let e = t.edge_id(s, 0);
        suffix.push(e);
        s = t.edge(e).to;
    }
    let build = |p: &Path| {
        let edges = prefix.iter().chain(&p.edges).chain(&suffix).copied().collect();
        Path::new(0, edges)
    };
    Ok((build(&pair.p1), build(&pair.p2)))
}

/// Monte-Carlo estimate of a probability with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub events: u64,
    pub trials: u64,
    pub p: f64,
    pub stderr: f64,
}

impl McEstimate {
    pub fn new(events: u64, trials: u64) -> Self {
        let p = if trials == 0 { 0.0 } else { events as f64 / trials as f64 };
        let stderr = if trials == 0 {
            0.0
        } else {
            (p * (1.0 - p) / trials as f64).sqrt()
        };
        McEstimate {
            events,
            trials,
            p,
            stderr,
        }
    }
}

const MC_BATCH: u64 = 1024;

/// Simulated `Pr{P_S → P̃_S}` with a real relay decoder: `P_S` is sent, the
/// relay forwards its Viterbi decision, and an event is counted when the
/// best near-ML metric over relay paths of `P̃_S` is no larger than that
/// of `P_S`.
pub fn mc_pep<T: Real>(
    lt: &LabelledTrellis<T>,
    p_s: &Path,
    p_t: &Path,
    params: &ChannelParams<T>,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_pair(lt.trellis(), p_s, p_t)?;
    let dec = NearMlDecoder::new(lt);
    let amp = params.amplitude();
    let len = p_s.len();
    let xs1 = params.scale(&lt.symbols(p_s, Which::S1));
    let xs2 = params.scale(&lt.symbols(p_s, Which::S2));
    let one_trial = |trial: u64| -> Result<bool> {
        let h = draw_realization(params, len, &TrialStreams::new(seed, trial));
        let (y_r, y_d1) = phase1(&xs1, &h)?;
        let relay = relay_decode(lt, amp, &y_r, &h.h_sr)?;
        let xr = params.scale(&lt.symbols(&relay.path, Which::R));
        let y_d2 = phase2(&xs2, &xr, &h)?;
        let (_, m_s) = dec.best_relay_path(amp, &y_d1, &y_d2, &h, p_s)?;
        let (_, m_t) = dec.best_relay_path(amp, &y_d1, &y_d2, &h, p_t)?;
        Ok(m_t <= m_s)
    };
    let batches = trials.div_ceil(MC_BATCH);
    let events = (0..batches)
        .into_par_iter()
        .map(|b| {
            let lo = b * MC_BATCH;
            let hi = (lo + MC_BATCH).min(trials);
            let mut n = 0u64;
            for trial in lo..hi {
                n += u64::from(one_trial(trial)?);
            }
            Ok(n)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    Ok(McEstimate::new(events, trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PepPoint {
    pub es_db: f64,
    pub bound_full: f64,
    pub bound_printed: f64,
    /// Up to an unspecified constant.
    pub bound_dominant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PepReport {
    pub pair_id: usize,
    /// `|η_s1| + |η_s2 ∪ η_r|`.
    pub diversity_exponent: usize,
    pub snr_grid: Vec<PepPoint>,
}

/// Bounds of one pair over an `E_S` grid. The dominant term is reported
/// only for minimum-diversity pairs.
pub fn pep_report<T: Real>(
    lt: &LabelledTrellis<T>,
    pair_id: usize,
    p_s: &Path,
    p_t: &Path,
    params: &ChannelParams<T>,
    es_grid_db: &[T],
) -> Result<PepReport> {
    let e1 = eta_set(lt, p_s, p_t, Which::S1)?;
    let eg = eta_union(lt, p_s, p_t)?;
    let snr_grid = es_grid_db
        .iter()
        .map(|&es| {
            let p = params.with_es_db(es);
            let full = pep_full(lt, p_s, p_t, &p)?;
            let dominant = match pep_dominant(lt, p_s, p_t, &p) {
                Ok(v) => Some(v.as_f64()),
                Err(Error::NotMinimumDiversity) => None,
                Err(e) => return Err(e),
            };
            Ok(PepPoint {
                es_db: es.as_f64(),
                bound_full: full.all_pairs.as_f64(),
                bound_printed: full.printed.as_f64(),
                bound_dominant: dominant,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PepReport {
        pair_id,
        diversity_exponent: e1.len() + eg.len(),
        snr_grid,
    })
}

/// Slope of `log10 y` against `x/10`, negated; `x` in dB.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0 / 10.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    -sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::LabellingScheme;
    use crate::trellis::{catalog, encode_path};
    use approx::assert_relative_eq;

    #[test]
    fn lemma1_examples() {
        let x = [Complex::new(1.0, 0.0), Complex::new(0.0, 1.0)];
        assert_relative_eq!(lemma1_bound(&x, &x, 0.0).unwrap(), 0.5);
        let y = [Complex::new(-1.0, 0.0), Complex::new(0.0, 1.0)];
        assert_relative_eq!(lemma1_bound(&x, &y, 0.0).unwrap(), 0.5 * (-1.0f64).exp());
        assert_eq!(lemma1_bound(&x, &y, -100.0).unwrap(), 1.0);
        assert!(lemma1_bound(&x, &y[..1], 0.0).is_err());
    }

    #[test]
    fn q_function_values() {
        assert_relative_eq!(q_function(0.0), 0.5);
        assert_relative_eq!(q_function(1.0), 0.158_655_253_931_457, epsilon = 1e-9);
    }

    #[test]
    fn embedding_makes_terminated_paths() {
        let lt = catalog::<f64>("eight_state_8psk").unwrap();
        let t = lt.trellis();
        let pair = PathPair {
            p1: Path::new(3, vec![t.edge_id(3, 1)]),
            p2: Path::new(3, vec![t.edge_id(3, 2)]),
        };
        if t.edge(pair.p1.edges[0]).to == t.edge(pair.p2.edges[0]).to {
            let (a, b) = embed_pair(t, &pair).unwrap();
            assert!(a.is_terminated(t) && b.is_terminated(t));
        }
        let bad = PathPair {
            p1: Path::new(0, vec![t.edge_id(0, 0)]),
            p2: Path::new(1, vec![t.edge_id(1, 0)]),
        };
        assert!(embed_pair(t, &bad).is_err());
    }

    #[test]
    fn uncoded_full_bound_equals_trellis_sum() {
        let p = ChannelParams::from_db(0.0, 10.0, 10.0, 12.0).unwrap();
        for scheme in [LabellingScheme::Constant, LabellingScheme::Bar] {
            let lt = crate::trellis::uncoded::<f64>(8, scheme).unwrap();
            let triple = LabellingTriple::for_scheme(scheme, 8);
            let u = uncoded_pep_bound(&triple, lt.constellation(), &p, 2, 5).unwrap();
            let full = pep_full(&lt, &Path::new(0, vec![2]), &Path::new(0, vec![5]), &p).unwrap();
            assert_relative_eq!(u.full, full.all_pairs, max_relative = 1e-12);
            assert_relative_eq!(u.leading, full.first_term, max_relative = 1e-12);
        }
        let triple = LabellingTriple::for_scheme(LabellingScheme::Bar, 8);
        let c = crate::constellation::make_psk::<f64>(8).unwrap();
        assert_eq!(uncoded_pep_bound(&triple, &c, &p, 3, 3), Err(Error::SameMessage));
    }

    #[test]
    fn dominant_rejects_non_minimum_pairs() {
        let lt = catalog::<f64>("four_state_8psk").unwrap();
        let t = lt.trellis();
        let p = ChannelParams::from_db(0.0, 15.0, 15.0, 10.0).unwrap();
        let a = encode_path(t, &[0, 0, 0, 0, 0, 0]).unwrap();
        let b = encode_path(t, &[1, 1, 0, 1, 1, 0]).unwrap();
        assert_eq!(pep_dominant(&lt, &a, &b, &p), Err(Error::NotMinimumDiversity));
        assert!(pep_full(&lt, &a, &a, &p).is_err());
    }
}
