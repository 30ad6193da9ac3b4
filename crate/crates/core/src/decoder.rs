//! Viterbi decoders for the relay and the destination, plus exhaustive
//! reference searches for small frames.
//!
//! All decoders search paths that start and end in state 0 (state `[0, 0]`
//! on the product trellis). Ties are broken in favour of the lowest edge id.
//! Metrics take symbols scaled by `amp = √E_S`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::channel::ChannelRealization;
use crate::scalar::Real;
use crate::trellis::{build_product_trellis, LabelledTrellis, Path, ProductTrellis, Trellis, Which};

/// Survivor metrics are shifted by their minimum this often.
const RENORM_INTERVAL: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult<T> {
    /// Decoded source path.
    pub path: Path,
    /// Relay path of the winning product-trellis path (near-ML only).
    pub relay_path: Option<Path>,
    pub metric: T,
    /// Additions and comparisons in add-compare-select.
    pub op_count: u64,
}

/// `2N²K² / log2 K` operations per decoded bit for the product trellis.
pub fn complexity_per_bit(n: usize, k: usize) -> f64 {
    let (n, k) = (n as f64, k as f64);
    2.0 * n * n * k * k / k.log2()
}

trait Lattice {
    fn n_states(&self) -> usize;
    fn n_edges(&self) -> usize;
    fn incoming(&self, state: usize) -> &[usize];
    fn source(&self, edge: usize) -> usize;
}

impl Lattice for Trellis {
    fn n_states(&self) -> usize {
        Trellis::n_states(self)
    }
    fn n_edges(&self) -> usize {
        self.edges().len()
    }
    fn incoming(&self, state: usize) -> &[usize] {
        Trellis::incoming(self, state)
    }
    fn source(&self, edge: usize) -> usize {
        self.edge(edge).from
    }
}

impl Lattice for ProductTrellis {
    fn n_states(&self) -> usize {
        ProductTrellis::n_states(self)
    }
    fn n_edges(&self) -> usize {
        self.edges().len()
    }
    fn incoming(&self, state: usize) -> &[usize] {
        ProductTrellis::incoming(self, state)
    }
    fn source(&self, edge: usize) -> usize {
        self.edges()[edge].from
    }
}

struct Survivor<T> {
    edges: Vec<usize>,
    metric: T,
    ops: u64,
}

/// Viterbi search from state 0 to state 0 over `stages` branches.
/// `fill(stage, metrics)` writes the branch metric of every edge.
fn viterbi<T: Real, G: Lattice>(
    g: &G,
    stages: usize,
    mut fill: impl FnMut(usize, &mut [T]),
) -> Result<Survivor<T>> {
    const NONE: usize = usize::MAX;
    let n = g.n_states();
    let inf = T::infinity();
    let mut cur = vec![inf; n];
    cur[0] = T::zero();
    let mut next = vec![inf; n];
    let mut surv = vec![NONE; stages * n];
    let mut bm = vec![T::zero(); g.n_edges()];
    let mut offset = T::zero();
    let mut ops = 0u64;
    for st in 0..stages {
        fill(st, &mut bm);
        for s in 0..n {
            let mut best = inf;
            let mut arg = NONE;
            for &e in g.incoming(s) {
                let p = cur[g.source(e)];
                if p == inf {
                    continue;
                }
                let m = p + bm[e];
                ops += 1;
                if arg == NONE {
                    best = m;
                    arg = e;
                } else {
                    ops += 1;
                    if m < best {
                        best = m;
                        arg = e;
                    }
                }
            }
            next[s] = best;
            surv[st * n + s] = arg;
        }
        std::mem::swap(&mut cur, &mut next);
        if (st + 1) % RENORM_INTERVAL == 0 {
            let low = cur.iter().copied().fold(inf, T::min);
            if low.is_finite() {
                cur.iter_mut().for_each(|m| *m = *m - low);
                offset = offset + low;
            }
        }
    }
    if cur[0] == inf {
        return Err(Error::InvalidParameter(format!(
            "no path of {stages} branches returns to state 0"
        )));
    }
    let mut edges = vec![0; stages];
    let mut s = 0;
    for st in (0..stages).rev() {
        let e = surv[st * n + s];
        edges[st] = e;
        s = g.source(e);
    }
    Ok(Survivor {
        edges,
        metric: cur[0] + offset,
        ops,
    })
}

fn check_lens<T>(want: usize, seqs: &[&[T]]) -> Result<()> {
    for s in seqs {
        if s.len() != want {
            return Err(Error::LengthMismatch {
                left: s.len(),
                right: want,
            });
        }
    }
    Ok(())
}

fn check_realization<T: Real>(len: usize, h: &ChannelRealization<T>) -> Result<()> {
    if h.len() < len {
        return Err(Error::LengthMismatch {
            left: len,
            right: h.len(),
        });
    }
    Ok(())
}

/// Per-label squared distances `|y - g·amp·x_l|²`.
fn label_costs<T: Real>(pts: &[Complex<T>], y: Complex<T>, g: Complex<T>, out: &mut [T]) {
    for (o, &x) in out.iter_mut().zip(pts) {
        *o = (y - g * x).norm_sqr();
    }
}

fn scaled_points<T: Real>(lt: &LabelledTrellis<T>, amp: T) -> Vec<Complex<T>> {
    lt.constellation().points().iter().map(|&x| x * amp).collect()
}

/// Relay ML decoder: minimizes `Σ |Y_r - h_sr x_s1|²` over terminated paths.
pub fn relay_decode<T: Real>(
    lt: &LabelledTrellis<T>,
    amp: T,
    y_r: &[Complex<T>],
    h_sr: &[Complex<T>],
) -> Result<DecodeResult<T>> {
    check_lens(y_r.len(), &[h_sr])?;
    let t = lt.trellis();
    let pts = scaled_points(lt, amp);
    let mut cost = vec![T::zero(); pts.len()];
    let best = viterbi(t, y_r.len(), |i, bm| {
        label_costs(&pts, y_r[i], h_sr[i], &mut cost);
        for (e, m) in bm.iter_mut().enumerate() {
            *m = cost[lt.label(e, Which::S1)];
        }
    })?;
    Ok(DecodeResult {
        path: Path::new(0, best.edges),
        relay_path: None,
        metric: best.metric,
        op_count: best.ops,
    })
}

/// `Σ |Y_r - h_sr x_s1(P)|²`.
pub fn relay_path_metric<T: Real>(
    lt: &LabelledTrellis<T>,
    amp: T,
    y_r: &[Complex<T>],
    h_sr: &[Complex<T>],
    path: &Path,
) -> T {
    path.edges
        .iter()
        .enumerate()
        .map(|(i, &e)| (y_r[i] - h_sr[i] * lt.symbol(e, Which::S1) * amp).norm_sqr())
        .sum()
}

fn destination_cost<T: Real>(
    lt: &LabelledTrellis<T>,
    amp: T,
    y_d1: &[Complex<T>],
    y_d2: &[Complex<T>],
    h: &ChannelRealization<T>,
    i: usize,
    source_edge: usize,
    relay_edge: usize,
) -> T {
    let xs1 = lt.symbol(source_edge, Which::S1) * amp;
    let xs2 = lt.symbol(source_edge, Which::S2) * amp;
    let xr = lt.symbol(relay_edge, Which::R) * amp;
    let xs1b = lt.symbol(relay_edge, Which::S1) * amp;
    (y_d1[i] - h.h_sd1[i] * xs1).norm_sqr()
        + (y_d2[i] - h.h_sd2[i] * xs2 - h.h_rd[i] * xr).norm_sqr()
        + h.h_sr[i].norm_sqr() * (xs1 - xs1b).norm_sqr() / T::lit(4.0)
}

/// Genie decoder for an error-free relay: the relay symbols follow the
/// source path, so the search runs on the base trellis.
pub fn ideal_ml_decode<T: Real>(
    lt: &LabelledTrellis<T>,
    amp: T,
    y_d1: &[Complex<T>],
    y_d2: &[Complex<T>],
    h: &ChannelRealization<T>,
) -> Result<DecodeResult<T>> {
    check_lens(y_d1.len(), &[y_d2])?;
    check_realization(y_d1.len(), h)?;
    let t = lt.trellis();
    let m = lt.constellation().size();
    let pts = scaled_points(lt, amp);
    let mut a = vec![T::zero(); m];
    let best = viterbi(t, y_d1.len(), |i, bm| {
        label_costs(&pts, y_d1[i], h.h_sd1[i], &mut a);
        for (e, out) in bm.iter_mut().enumerate() {
            let [l1, l2, lr] = lt.labels()[e];
            *out = a[l1] + (y_d2[i] - h.h_sd2[i] * pts[l2] - h.h_rd[i] * pts[lr]).norm_sqr();
        }
    })?;
    Ok(DecodeResult {
        path: Path::new(0, best.edges),
        relay_path: None,
        metric: best.metric,
        op_count: best.ops,
    })
}

/// `Σ |Y_d1 - h_sd1 x_s1(P)|² + |Y_d2 - h_sd2 x_s2(P) - h_rd x_r(P)|²`.
pub fn ideal_path_metric<T: Real>(
    lt: &LabelledTrellis<T>,
    amp: T,
    y_d1: &[Complex<T>],
    y_d2: &[Complex<T>],
    h: &ChannelRealization<T>,
    path: &Path,
) -> T {
    path.edges
        .iter()
        .enumerate()
        .map(|(i, &e)| destination_cost(lt, amp, y_d1, y_d2, h, i, e, e))
        .sum()
}

/// `Σ φ_i(P_S, P_R)`, the near-ML metric of a source/relay path pair:
/// `|Y_d1 - h_sd1 x_s1(P_S)|² + |Y_d2 - h_sd2 x_s2(P_S) - h_rd x_r(P_R)|²
/// + |h_sr|² |x_s1(P_S) - x_s1(P_R)|² / 4` per branch.
pub fn near_ml_path_metric<T: Real>(
    lt: &LabelledTrellis<T>,
    amp: T,
    y_d1: &[Complex<T>],
    y_d2: &[Complex<T>],
    h: &ChannelRealization<T>,
    p_s: &Path,
    p_r: &Path,
) -> T {
    p_s.edges
        .iter()
        .zip(&p_r.edges)
        .enumerate()
        .map(|(i, (&es, &er))| destination_cost(lt, amp, y_d1, y_d2, h, i, es, er))
        .sum()
}

/// Destination near-ML decoder on the product trellis.
#[derive(Debug, Clone)]
pub struct NearMlDecoder<'a, T: Real> {
    lt: &'a LabelledTrellis<T>,
    pt: ProductTrellis,
    /// `|x_l - x_l'|²` of the unit-energy points.
    dist: Vec<T>,
}

impl<'a, T: Real> NearMlDecoder<'a, T> {
    pub fn new(lt: &'a LabelledTrellis<T>) -> Self {
        let pts = lt.constellation().points();
        let dist = pts
            .iter()
            .flat_map(|&a| pts.iter().map(move |&b| (a - b).norm_sqr()))
            .collect();
        NearMlDecoder {
            lt,
            pt: build_product_trellis(lt),
            dist,
        }
    }

    pub fn product_trellis(&self) -> &ProductTrellis {
        &self.pt
    }

    /// Minimizes `Σ φ_i(P_S, P_R)` jointly and reports the `P_S` part.
    pub fn decode(
        &self,
        amp: T,
        y_d1: &[Complex<T>],
        y_d2: &[Complex<T>],
        h: &ChannelRealization<T>,
    ) -> Result<DecodeResult<T>> {
        check_lens(y_d1.len(), &[y_d2])?;
        check_realization(y_d1.len(), h)?;
        let m = self.lt.constellation().size();
        let pts = scaled_points(self.lt, amp);
        let mut a = vec![T::zero(); m];
        let mut b = vec![T::zero(); m * m];
        let quarter = T::lit(0.25);
        let best = viterbi(&self.pt, y_d1.len(), |i, bm| {
            label_costs(&pts, y_d1[i], h.h_sd1[i], &mut a);
            for l2 in 0..m {
                let r = y_d2[i] - h.h_sd2[i] * pts[l2];
                label_costs(&pts, r, h.h_rd[i], &mut b[l2 * m..(l2 + 1) * m]);
            }
            let c = quarter * h.h_sr[i].norm_sqr() * amp * amp;
            for (out, pe) in bm.iter_mut().zip(self.pt.edges()) {
                let [l1, l2, l1b, lr] = pe.labels;
                *out = a[l1] + b[l2 * m + lr] + c * self.dist[l1 * m + l1b];
            }
        })?;
        let edges = self.pt.edges();
        let ps = best.edges.iter().map(|&e| edges[e].ea).collect();
        let pr = best.edges.iter().map(|&e| edges[e].eb).collect();
        Ok(DecodeResult {
            path: Path::new(0, ps),
            relay_path: Some(Path::new(0, pr)),
            metric: best.metric,
            op_count: best.ops,
        })
    }

    /// `min over P_R of Σ φ_i(p_s, P_R)` and the minimizing relay path.
    pub fn best_relay_path(
        &self,
        amp: T,
        y_d1: &[Complex<T>],
        y_d2: &[Complex<T>],
        h: &ChannelRealization<T>,
        p_s: &Path,
    ) -> Result<(Path, T)> {
        check_lens(y_d1.len(), &[y_d2])?;
        check_realization(y_d1.len(), h)?;
        if p_s.len() != y_d1.len() {
            return Err(Error::LengthMismatch {
                left: p_s.len(),
                right: y_d1.len(),
            });
        }
        let lt = self.lt;
        let m = lt.constellation().size();
        let pts = scaled_points(lt, amp);
        let quarter = T::lit(0.25);
        let best = viterbi(lt.trellis(), y_d1.len(), |i, bm| {
            let es = p_s.edges[i];
            let [l1, l2, _] = lt.labels()[es];
            let fixed = (y_d1[i] - h.h_sd1[i] * pts[l1]).norm_sqr();
            let r = y_d2[i] - h.h_sd2[i] * pts[l2];
            let c = quarter * h.h_sr[i].norm_sqr() * amp * amp;
            for (e, out) in bm.iter_mut().enumerate() {
                let [l1b, _, lr] = lt.labels()[e];
                *out = fixed + (r - h.h_rd[i] * pts[lr]).norm_sqr() + c * self.dist[l1 * m + l1b];
            }
        })?;
        Ok((Path::new(0, best.edges), best.metric))
    }
}

/// One-shot near-ML decode; build a [`NearMlDecoder`] to decode many frames.
pub fn near_ml_decode<T: Real>(
    lt: &LabelledTrellis<T>,
    amp: T,
    y_d1: &[Complex<T>],
    y_d2: &[Complex<T>],
    h: &ChannelRealization<T>,
) -> Result<DecodeResult<T>> {
    NearMlDecoder::new(lt).decode(amp, y_d1, y_d2, h)
}

/// Every path of `len` branches from state 0 back to state 0.
///
/// The count grows like `K^len`; meant for exhaustive checks on short frames.
pub fn terminated_paths(t: &Trellis, len: usize) -> Vec<Path> {
    fn go(t: &Trellis, len: usize, cur: &mut Vec<usize>, state: usize, out: &mut Vec<Path>) {
        if cur.len() == len {
            if state == 0 {
                out.push(Path::new(0, cur.clone()));
            }
            return;
        }
        for u in 0..t.branches() {
            let e = t.edge_id(state, u);
            cur.push(e);
            go(t, len, cur, t.edge(e).to, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(t, len, &mut Vec::with_capacity(len), 0, &mut out);
    out
}
