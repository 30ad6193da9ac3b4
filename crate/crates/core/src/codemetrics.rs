//! Design criteria for codes on the relay channel: index sets where two
//! paths disagree, effective lengths, product distances, coding-gain
//! metrics, diversity bounds and the labelling gain of uncoded schemes.
//!
//! Index sets are 0-based branch positions. Code-level minima are taken over
//! path pairs that diverge from a common state and remerge within a horizon,
//! using dynamic programming over pairs of states so that zero-weight loops
//! do not blow up the search.

use std::collections::HashMap;

use serde::Serialize;

use crate::constellation::{Constellation, LabellingScheme, LabellingTriple};
use crate::error::{Error, Result};
use crate::scalar::{linear_to_db, Real};
use crate::trellis::{code_unmerged_length, LabelledTrellis, Path, Trellis, Which};

/// Ratio `σ²_sd / σ²_rd` of the direct and relay-destination link variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRatio<T: Real>(T);

impl<T: Real> GammaRatio<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        Ok(GammaRatio(gamma))
    }

    /// From linear link variances.
    pub fn from_variances(sigma2_sd: T, sigma2_rd: T) -> Result<Self> {
        Self::new(sigma2_sd / sigma2_rd)
    }

    pub fn get(self) -> T {
        self.0
    }

    /// The metrics assume a weak direct link; `false` means the design
    /// criteria are outside their intended regime.
    pub fn is_small(self) -> bool {
        self.0 < T::one()
    }
}

fn check_lengths(p1: &Path, p2: &Path) -> Result<()> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch {
            left: p1.len(),
            right: p2.len(),
        });
    }
    Ok(())
}

fn d2<T: Real>(lt: &LabelledTrellis<T>, e1: usize, e2: usize, which: Which) -> T {
    (lt.symbol(e1, which) - lt.symbol(e2, which)).norm_sqr()
}

/// Positions `i` where the `which` symbols of the two paths differ.
pub fn eta_set<T: Real>(
    lt: &LabelledTrellis<T>,
    p1: &Path,
    p2: &Path,
    which: Which,
) -> Result<Vec<usize>> {
    check_lengths(p1, p2)?;
    Ok(p1
        .edges
        .iter()
        .zip(&p2.edges)
        .enumerate()
        .filter(|(_, (&a, &b))| lt.label(a, which) != lt.label(b, which))
        .map(|(i, _)| i)
        .collect())
}

/// `η_s2 ∪ η_r`, ascending.
pub fn eta_union<T: Real>(lt: &LabelledTrellis<T>, p1: &Path, p2: &Path) -> Result<Vec<usize>> {
    check_lengths(p1, p2)?;
    Ok(p1
        .edges
        .iter()
        .zip(&p2.edges)
        .enumerate()
        .filter(|(_, (&a, &b))| {
            lt.label(a, Which::S2) != lt.label(b, Which::S2)
                || lt.label(a, Which::R) != lt.label(b, Which::R)
        })
        .map(|(i, _)| i)
        .collect())
}

/// `|η_s2 ∪ η_r|` for one pair.
pub fn generalized_effective_length<T: Real>(
    lt: &LabelledTrellis<T>,
    p1: &Path,
    p2: &Path,
) -> Result<usize> {
    Ok(eta_union(lt, p1, p2)?.len())
}

fn nonempty(eta: Vec<usize>, p1: &Path, p2: &Path, what: &'static str) -> Result<Vec<usize>> {
    if p1 == p2 {
        return Err(Error::IdenticalPaths);
    }
    if eta.is_empty() {
        return Err(Error::EmptyIndexSet(what));
    }
    Ok(eta)
}

/// `m1 = Π_{η_s1} |Δx_s1|²`.
pub fn product_distance_m1<T: Real>(lt: &LabelledTrellis<T>, p1: &Path, p2: &Path) -> Result<T> {
    let eta = nonempty(eta_set(lt, p1, p2, Which::S1)?, p1, p2, "T_S1")?;
    Ok(eta
        .iter()
        .map(|&i| d2(lt, p1.edges[i], p2.edges[i], Which::S1))
        .fold(T::one(), |a, b| a * b))
}

/// Relay and phase-2 source factors over `η_s2 ∪ η_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct M2Parts<T> {
    /// `Π |Δx_r|²`.
    pub m21: T,
    /// `Π |Δx_s2|²`; zero when some position differs at the relay only.
    pub m22: T,
}

pub fn m2_parts<T: Real>(lt: &LabelledTrellis<T>, p1: &Path, p2: &Path) -> Result<M2Parts<T>> {
    let eta = nonempty(eta_union(lt, p1, p2)?, p1, p2, "T_S2/T_R")?;
    let mut m21 = T::one();
    let mut m22 = T::one();
    for &i in &eta {
        m21 = m21 * d2(lt, p1.edges[i], p2.edges[i], Which::R);
        m22 = m22 * d2(lt, p1.edges[i], p2.edges[i], Which::S2);
    }
    Ok(M2Parts { m21, m22 })
}

/// `m2 = Π_{η_s2 ∪ η_r} (γ|Δx_s2|² + |Δx_r|²)`.
pub fn generalized_product_distance_m2<T: Real>(
    lt: &LabelledTrellis<T>,
    p1: &Path,
    p2: &Path,
    gamma: T,
) -> Result<T> {
    let eta = nonempty(eta_union(lt, p1, p2)?, p1, p2, "T_S2/T_R")?;
    Ok(eta
        .iter()
        .map(|&i| {
            let (a, b) = (p1.edges[i], p2.edges[i]);
            gamma * d2(lt, a, b, Which::S2) + d2(lt, a, b, Which::R)
        })
        .fold(T::one(), |a, b| a * b))
}

/// Corollary-style diversity bounds of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiversityBounds {
    pub lower: usize,
    pub upper: usize,
    /// `η_r ⊆ η_s2`, in which case `lower == upper`.
    pub tight: bool,
}

pub fn diversity_bounds<T: Real>(
    lt: &LabelledTrellis<T>,
    p1: &Path,
    p2: &Path,
) -> Result<DiversityBounds> {
    if p1 == p2 {
        return Err(Error::IdenticalPaths);
    }
    let s1 = eta_set(lt, p1, p2, Which::S1)?.len();
    let s2 = eta_set(lt, p1, p2, Which::S2)?;
    let r = eta_set(lt, p1, p2, Which::R)?;
    let gel = eta_union(lt, p1, p2)?.len();
    let tight = r.iter().all(|i| s2.binary_search(i).is_ok());
    Ok(DiversityBounds {
        lower: s1 + s2.len(),
        upper: (s1 + gel).min(2 * s1 + s2.len()),
        tight,
    })
}

/// Everything the design criteria say about one path pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathPairMetrics<T> {
    pub eta_s1: Vec<usize>,
    pub eta_s2: Vec<usize>,
    pub eta_r: Vec<usize>,
    pub gel: usize,
    pub m1: T,
    pub m2: T,
    /// `m1 · m2`.
    pub m: T,
    pub div_lower: usize,
    pub div_upper: usize,
}

pub fn pair_metrics<T: Real>(
    lt: &LabelledTrellis<T>,
    p1: &Path,
    p2: &Path,
    gamma: T,
) -> Result<PathPairMetrics<T>> {
    let m1 = product_distance_m1(lt, p1, p2)?;
    let m2 = generalized_product_distance_m2(lt, p1, p2, gamma)?;
    let b = diversity_bounds(lt, p1, p2)?;
    Ok(PathPairMetrics {
        eta_s1: eta_set(lt, p1, p2, Which::S1)?,
        eta_s2: eta_set(lt, p1, p2, Which::S2)?,
        eta_r: eta_set(lt, p1, p2, Which::R)?,
        gel: generalized_effective_length(lt, p1, p2)?,
        m1,
        m2,
        m: m1 * m2,
        div_lower: b.lower,
        div_upper: b.upper,
    })
}

/// Per-branch disagreement flags of an edge pair: `(s1, s2, r)`.
fn flags<T: Real>(lt: &LabelledTrellis<T>, e1: usize, e2: usize) -> (bool, bool, bool) {
    (
        lt.label(e1, Which::S1) != lt.label(e2, Which::S1),
        lt.label(e1, Which::S2) != lt.label(e2, Which::S2),
        lt.label(e1, Which::R) != lt.label(e2, Which::R),
    )
}

/// Calls `f(start, e1, e2)` for every divergence with `u1 < u2`.
fn for_each_divergence(t: &Trellis, mut f: impl FnMut(usize, usize, usize)) {
    for s in 0..t.n_states() {
        for u1 in 0..t.branches() {
            for u2 in u1 + 1..t.branches() {
                f(s, t.edge_id(s, u1), t.edge_id(s, u2));
            }
        }
    }
}

/// Minimum over diverge-remerge events of the number of branches where
/// `weight(e1, e2)` holds.
fn min_count<T: Real>(
    lt: &LabelledTrellis<T>,
    horizon: usize,
    weight: impl Fn(usize, usize) -> bool,
) -> Result<usize> {
    let t = lt.trellis();
    let n = t.n_states();
    let mut cur = vec![usize::MAX; n * n];
    let mut best = usize::MAX;
    let relax = |store: &mut Vec<usize>, best: &mut usize, c: usize, e1: usize, e2: usize| {
        let c = c + usize::from(weight(e1, e2));
        let (a, b) = (t.edge(e1).to, t.edge(e2).to);
        if a == b {
            *best = (*best).min(c);
        } else if c < store[a * n + b] {
            store[a * n + b] = c;
        }
    };
    for_each_divergence(t, |_, e1, e2| relax(&mut cur, &mut best, 0, e1, e2));
    for _ in 1..horizon {
        let mut next = vec![usize::MAX; n * n];
        for (idx, &c) in cur.iter().enumerate() {
            if c == usize::MAX || c >= best {
                continue;
            }
            let (a, b) = (idx / n, idx % n);
            for u1 in 0..t.branches() {
                for u2 in 0..t.branches() {
                    relax(&mut next, &mut best, c, t.edge_id(a, u1), t.edge_id(b, u2));
                }
            }
        }
        cur = next;
    }
    if best == usize::MAX {
        return Err(Error::HorizonTooSmall(horizon));
    }
    Ok(best)
}

/// Minimum `|η_which|` over distinct diverge-remerge pairs.
pub fn effective_length<T: Real>(
    lt: &LabelledTrellis<T>,
    which: Which,
    horizon: usize,
) -> Result<usize> {
    min_count(lt, horizon, |e1, e2| lt.label(e1, which) != lt.label(e2, which))
}

/// Minimum `|η_s2 ∪ η_r|` over distinct diverge-remerge pairs.
pub fn code_generalized_effective_length<T: Real>(
    lt: &LabelledTrellis<T>,
    horizon: usize,
) -> Result<usize> {
    min_count(lt, horizon, |e1, e2| {
        let (_, s2, r) = flags(lt, e1, e2);
        s2 || r
    })
}

/// `𝒢₁`: minimum `m1` over pairs attaining the effective length of `T_S1`.
fn min_m1<T: Real>(lt: &LabelledTrellis<T>, eff: usize, horizon: usize) -> Result<T> {
    let t = lt.trellis();
    let n = t.n_states();
    let width = eff + 1;
    let inf = T::infinity();
    let mut best = inf;
    let mut cur = vec![inf; n * n * width];
    let step = |store: &mut Vec<T>, best: &mut T, c: usize, m: T, e1: usize, e2: usize| {
        let (c, m) = if lt.label(e1, Which::S1) != lt.label(e2, Which::S1) {
            (c + 1, m * d2(lt, e1, e2, Which::S1))
        } else {
            (c, m)
        };
        if c > eff {
            return;
        }
        let (a, b) = (t.edge(e1).to, t.edge(e2).to);
        if a == b {
            if c == eff && m < *best {
                *best = m;
            }
        } else {
            let slot = &mut store[(a * n + b) * width + c];
            if m < *slot {
                *slot = m;
            }
        }
    };
    for_each_divergence(t, |_, e1, e2| step(&mut cur, &mut best, 0, T::one(), e1, e2));
    for _ in 1..horizon {
        let mut next = vec![inf; n * n * width];
        for (idx, &m) in cur.iter().enumerate() {
            if m == inf {
                continue;
            }
            let (pair, c) = (idx / width, idx % width);
            let (a, b) = (pair / n, pair % n);
            for u1 in 0..t.branches() {
                for u2 in 0..t.branches() {
                    step(&mut next, &mut best, c, m, t.edge_id(a, u1), t.edge_id(b, u2));
                }
            }
        }
        cur = next;
    }
    if best == inf {
        return Err(Error::HorizonTooSmall(horizon));
    }
    Ok(best)
}

/// Product-distance factors accumulated along a pair: `m1, m21, m22, m2`.
type Factors<T> = [T; 4];

fn dominates<T: Real>(a: &Factors<T>, b: &Factors<T>) -> bool {
    let tol = T::lit(1e-12);
    a.iter().zip(b).all(|(x, y)| *x <= *y + tol * y.abs().max(T::one()))
}

fn pareto_insert<T: Real>(front: &mut Vec<Factors<T>>, v: Factors<T>) {
    if front.iter().any(|f| dominates(f, &v)) {
        return;
    }
    front.retain(|f| !dominates(&v, f));
    front.push(v);
}

/// Pareto fronts of factor tuples over pairs with `|η_s1| = |η_s2 ∪ η_r| = u`.
fn min_diversity_front<T: Real>(
    lt: &LabelledTrellis<T>,
    u: usize,
    gamma: T,
    horizon: usize,
) -> Vec<Factors<T>> {
    let t = lt.trellis();
    let n = t.n_states();
    type Key = (usize, usize, usize, usize);
    let mut done: Vec<Factors<T>> = Vec::new();
    let step = |store: &mut HashMap<Key, Vec<Factors<T>>>,
                done: &mut Vec<Factors<T>>,
                (c1, cg): (usize, usize),
                f: &Factors<T>,
                e1: usize,
                e2: usize| {
        let (s1, s2, r) = flags(lt, e1, e2);
        let mut f = *f;
        let (mut c1, mut cg) = (c1, cg);
        if s1 {
            c1 += 1;
            f[0] = f[0] * d2(lt, e1, e2, Which::S1);
        }
        if s2 || r {
            cg += 1;
            let ds2 = d2(lt, e1, e2, Which::S2);
            let dr = d2(lt, e1, e2, Which::R);
            f[1] = f[1] * dr;
            f[2] = f[2] * ds2;
            f[3] = f[3] * (gamma * ds2 + dr);
        }
        if c1 > u || cg > u {
            return;
        }
        let (a, b) = (t.edge(e1).to, t.edge(e2).to);
        if a == b {
            if c1 == u && cg == u {
                pareto_insert(done, f);
            }
        } else {
            pareto_insert(store.entry((a, b, c1, cg)).or_default(), f);
        }
    };
    let one = [T::one(); 4];
    let mut cur: HashMap<Key, Vec<Factors<T>>> = HashMap::new();
    for_each_divergence(t, |_, e1, e2| step(&mut cur, &mut done, (0, 0), &one, e1, e2));
    for _ in 1..horizon {
        if cur.is_empty() {
            break;
        }
        let mut next = HashMap::new();
        let mut keys: Vec<_> = cur.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let (a, b, c1, cg) = key;
            for f in &cur[&key] {
                for u1 in 0..t.branches() {
                    for u2 in 0..t.branches() {
                        step(
                            &mut next,
                            &mut done,
                            (c1, cg),
                            f,
                            t.edge_id(a, u1),
                            t.edge_id(b, u2),
                        );
                    }
                }
            }
        }
        cur = next;
    }
    debug_assert!(n > 0);
    done
}

/// Coding-gain metrics of a code.
///
/// `g` weights the relay and phase-2 source products as
/// `m1 · (Π|Δx_r|² + γ Π|Δx_s2|²)`; `g_exact` uses the full product
/// `m1 · Π(γ|Δx_s2|² + |Δx_r|²)`. Both agree when the minimum-diversity
/// pairs differ in one branch and are within `(1+γ)^U` of `g2` otherwise.
/// The `Option`s are `None` when no pair reaches the minimum diversity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodingGain<T> {
    pub g: Option<T>,
    pub g1: T,
    pub g2: Option<T>,
    pub g_exact: Option<T>,
}

pub fn coding_gain<T: Real>(
    lt: &LabelledTrellis<T>,
    gamma: T,
    horizon: usize,
) -> Result<CodingGain<T>> {
    let u = code_unmerged_length(lt.trellis(), horizon)?;
    let eff1 = effective_length(lt, Which::S1, horizon)?;
    let g1 = min_m1(lt, eff1, horizon)?;
    let front = min_diversity_front(lt, u, gamma, horizon);
    let min_of = |f: &dyn Fn(&Factors<T>) -> T| front.iter().map(f).fold(None, |acc: Option<T>, x| {
        Some(acc.map_or(x, |a| a.min(x)))
    });
    Ok(CodingGain {
        g: min_of(&|v| v[0] * (v[1] + gamma * v[2])),
        g1,
        g2: min_of(&|v| v[0] * v[1]),
        g_exact: min_of(&|v| v[0] * v[3]),
    })
}

/// Summary of a code, as emitted by the `analyze` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeReport {
    pub name: String,
    pub n_states: usize,
    pub branches: usize,
    pub m: usize,
    pub gamma: f64,
    pub horizon: usize,
    pub unmerged_length: usize,
    pub effective_length_s1: usize,
    pub effective_length_s2: usize,
    pub effective_length_r: usize,
    pub generalized_effective_length: usize,
    pub g1: f64,
    pub g2: Option<f64>,
    pub g: Option<f64>,
    pub g_exact: Option<f64>,
    pub min_diversity_pairs: usize,
    pub min_diversity_pairs_truncated: bool,
    pub diversity_lower: Option<usize>,
    pub diversity_upper: Option<usize>,
}

pub fn code_report<T: Real>(lt: &LabelledTrellis<T>, gamma: T, horizon: usize) -> Result<CodeReport> {
    let t = lt.trellis();
    let cg = coding_gain(lt, gamma, horizon)?;
    let pairs = match min_diversity_pairs(lt, horizon) {
        Ok(p) => Some(p),
        Err(Error::DiversityCondition { .. }) => None,
        Err(e) => return Err(e),
    };
    let bounds: Vec<DiversityBounds> = pairs
        .iter()
        .flat_map(|p| p.pairs.iter())
        .map(|p| diversity_bounds(lt, &p.p1, &p.p2))
        .collect::<Result<_>>()?;
    Ok(CodeReport {
        name: lt.name().to_string(),
        n_states: t.n_states(),
        branches: t.branches(),
        m: lt.constellation().size(),
        gamma: gamma.as_f64(),
        horizon,
        unmerged_length: code_unmerged_length(t, horizon)?,
        effective_length_s1: effective_length(lt, Which::S1, horizon)?,
        effective_length_s2: effective_length(lt, Which::S2, horizon)?,
        effective_length_r: effective_length(lt, Which::R, horizon)?,
        generalized_effective_length: code_generalized_effective_length(lt, horizon)?,
        g1: cg.g1.as_f64(),
        g2: cg.g2.map(Real::as_f64),
        g: cg.g.map(Real::as_f64),
        g_exact: cg.g_exact.map(Real::as_f64),
        min_diversity_pairs: pairs.as_ref().map_or(0, |p| p.pairs.len()),
        min_diversity_pairs_truncated: pairs.as_ref().is_some_and(|p| p.truncated),
        diversity_lower: bounds.iter().map(|b| b.lower).min(),
        diversity_upper: bounds.iter().map(|b| b.upper).min(),
    })
}

/// Two paths leaving the same state and remerging at their last branch.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PathPair {
    pub p1: Path,
    pub p2: Path,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinDiversityPairs {
    pub pairs: Vec<PathPair>,
    /// The listing stopped at the cap.
    pub truncated: bool,
}

/// Default cap on the number of listed pairs.
pub const MAX_LISTED_PAIRS: usize = 1 << 16;

/// All unordered pairs with `|η_s1| = |η_s2 ∪ η_r| = U`.
pub fn min_diversity_pairs<T: Real>(
    lt: &LabelledTrellis<T>,
    horizon: usize,
) -> Result<MinDiversityPairs> {
    min_diversity_pairs_capped(lt, horizon, MAX_LISTED_PAIRS)
}

pub fn min_diversity_pairs_capped<T: Real>(
    lt: &LabelledTrellis<T>,
    horizon: usize,
    cap: usize,
) -> Result<MinDiversityPairs> {
    let t = lt.trellis();
    let u = code_unmerged_length(t, horizon)?;
    for which in [Which::S1, Which::S2] {
        let eff = effective_length(lt, which, horizon)?;
        if eff != u {
            return Err(Error::DiversityCondition {
                trellis: which.name(),
                effective: eff,
                unmerged: u,
            });
        }
    }
    let n = t.n_states();
    let k = t.branches();
    let w = u + 1;
    // reach[((step * n + a) * n + b) * w² + c1 * w + cg]: from unmerged
    // (a, b) after `step` branches with counts (c1, cg), a completion exists.
    let idx = |step: usize, a: usize, b: usize, c1: usize, cg: usize| {
        (((step * n + a) * n + b) * w + c1) * w + cg
    };
    let mut reach = vec![false; (horizon + 1) * n * n * w * w];
    for step in (1..horizon).rev() {
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                for c1 in 0..w {
                    for cg in 0..w {
                        let ok = (0..k).any(|u1| {
                            (0..k).any(|u2| {
                                let (e1, e2) = (t.edge_id(a, u1), t.edge_id(b, u2));
                                let (f1, f2, fr) = flags(lt, e1, e2);
                                let n1 = c1 + usize::from(f1);
                                let ng = cg + usize::from(f2 || fr);
                                if n1 > u || ng > u {
                                    return false;
                                }
                                let (na, nb) = (t.edge(e1).to, t.edge(e2).to);
                                if na == nb {
                                    n1 == u && ng == u
                                } else {
                                    reach[idx(step + 1, na, nb, n1, ng)]
                                }
                            })
                        });
                        reach[idx(step, a, b, c1, cg)] = ok;
                    }
                }
            }
        }
    }

    struct Walk<'a, T: Real> {
        lt: &'a LabelledTrellis<T>,
        u: usize,
        cap: usize,
        out: Vec<PathPair>,
        truncated: bool,
        e1: Vec<usize>,
        e2: Vec<usize>,
        start: usize,
    }
    impl<T: Real> Walk<'_, T> {
        fn push(&mut self) {
            if self.out.len() >= self.cap {
                self.truncated = true;
                return;
            }
            self.out.push(PathPair {
                p1: Path::new(self.start, self.e1.clone()),
                p2: Path::new(self.start, self.e2.clone()),
            });
        }
    }

    fn descend<T: Real>(
        w: &mut Walk<'_, T>,
        reach: &dyn Fn(usize, usize, usize, usize, usize) -> bool,
        c1: usize,
        cg: usize,
        e1: usize,
        e2: usize,
    ) {
        if w.truncated {
            return;
        }
        let t = w.lt.trellis();
        let (f1, f2, fr) = flags(w.lt, e1, e2);
        let n1 = c1 + usize::from(f1);
        let ng = cg + usize::from(f2 || fr);
        if n1 > w.u || ng > w.u {
            return;
        }
        let (a, b) = (t.edge(e1).to, t.edge(e2).to);
        w.e1.push(e1);
        w.e2.push(e2);
        let step = w.e1.len();
        if a == b {
            if n1 == w.u && ng == w.u {
                w.push();
            }
        } else if reach(step, a, b, n1, ng) {
            for u1 in 0..t.branches() {
                for u2 in 0..t.branches() {
                    descend(w, reach, n1, ng, t.edge_id(a, u1), t.edge_id(b, u2));
                }
            }
        }
        w.e1.pop();
        w.e2.pop();
    }

    let lookup = |step: usize, a: usize, b: usize, c1: usize, cg: usize| {
        step < horizon && reach[idx(step, a, b, c1, cg)]
    };
    let mut walk = Walk {
        lt,
        u,
        cap,
        out: Vec::new(),
        truncated: false,
        e1: Vec::new(),
        e2: Vec::new(),
        start: 0,
    };
    let mut starts = Vec::new();
    for_each_divergence(t, |s, e1, e2| starts.push((s, e1, e2)));
    for (s, e1, e2) in starts {
        walk.start = s;
        descend(&mut walk, &lookup, 0, 0, e1, e2);
    }
    Ok(MinDiversityPairs {
        pairs: walk.out,
        truncated: walk.truncated,
    })
}

/// High-SNR metric `d(𝓛)` of an uncoded scheme: the minimum over message
/// pairs of `|Δx_s1|² (γ|Δx_s2|² + |Δx_r|²)`.
pub fn uncoded_metric_d<T: Real>(
    labellings: &LabellingTriple,
    constellation: &Constellation<T>,
    gamma: T,
) -> Result<T> {
    let m = constellation.size();
    for lab in [&labellings.s1, &labellings.s2, &labellings.r] {
        if lab.size() != m || !lab.is_bijection() {
            return Err(Error::NotABijection(m));
        }
    }
    let p = constellation.points();
    let dist = |lab: &crate::constellation::Labelling, a: usize, b: usize| {
        (p[lab.apply(a)] - p[lab.apply(b)]).norm_sqr()
    };
    let mut best = T::infinity();
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            let v = dist(&labellings.s1, a, b)
                * (gamma * dist(&labellings.s2, a, b) + dist(&labellings.r, a, b));
            best = best.min(v);
        }
    }
    Ok(best)
}

/// `10 log10(d(𝓛) / d(𝓛₀))` in dB, against constant labelling.
pub fn labelling_gain<T: Real>(
    scheme: LabellingScheme,
    constellation: &Constellation<T>,
    gamma: T,
) -> Result<T> {
    let m = constellation.size();
    let d = uncoded_metric_d(&LabellingTriple::for_scheme(scheme, m), constellation, gamma)?;
    let d0 = uncoded_metric_d(
        &LabellingTriple::for_scheme(LabellingScheme::Constant, m),
        constellation,
        gamma,
    )?;
    Ok(linear_to_db(d / d0))
}

/// Closed-form labelling gain of the bar scheme for `γ → 0`, in dB.
pub fn bar_labelling_gain_closed_form(m: usize) -> f64 {
    let x = std::f64::consts::PI / m as f64;
    20.0 * (1.0 / x.tan()).min(4.0 * x.cos().powi(2)).log10()
}
