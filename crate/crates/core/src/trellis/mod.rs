//! Trellis representation, encoding with zero-input termination, path
//! utilities, the product decoding trellis and the built-in code catalog.

mod catalog;
mod file;
mod product;

use std::collections::VecDeque;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::constellation::{Constellation, LabellingScheme, LabellingTriple};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use catalog::{catalog, catalog_names, catalog_source, uncoded};
pub use file::{parse_trellis_file, TrellisFile};
pub use product::{build_product_trellis, ProductEdge, ProductTrellis};

/// Selects one of the three edge labellings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    /// Source, phase 1.
    S1,
    /// Source, phase 2.
    S2,
    /// Relay, phase 2.
    R,
}

impl Which {
    pub const ALL: [Which; 3] = [Which::S1, Which::S2, Which::R];

    fn slot(self) -> usize {
        match self {
            Which::S1 => 0,
            Which::S2 => 1,
            Which::R => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Which::S1 => "T_S1",
            Which::S2 => "T_S2",
            Which::R => "T_R",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub input: usize,
    pub to: usize,
}

/// Time-invariant trellis with `N` states and `K` branches per state.
///
/// Edge ids are `from * K + input`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trellis {
    n_states: usize,
    branches: usize,
    edges: Vec<Edge>,
    incoming: Vec<Vec<usize>>,
    termination_len: usize,
}

impl Trellis {
    /// Builds a trellis from a next-state table `next[state][input]`.
    pub fn from_next_states(next: Vec<Vec<usize>>) -> Result<Self> {
        let n_states = next.len();
        if n_states == 0 {
            return Err(Error::InvalidTrellis("no states".into()));
        }
        let branches = next[0].len();
        if branches == 0 {
            return Err(Error::InvalidTrellis("no branches".into()));
        }
        let mut edges = Vec::with_capacity(n_states * branches);
        let mut incoming = vec![Vec::new(); n_states];
        for (from, row) in next.iter().enumerate() {
            if row.len() != branches {
                return Err(Error::InvalidTrellis(format!(
                    "state {from} has {} branches, expected {branches}",
                    row.len()
                )));
            }
            for (input, &to) in row.iter().enumerate() {
                if to >= n_states {
                    return Err(Error::InvalidTrellis(format!(
                        "edge {from}/{input} goes to unknown state {to}"
                    )));
                }
                incoming[to].push(edges.len());
                edges.push(Edge { from, input, to });
            }
        }
        for (s, inc) in incoming.iter().enumerate() {
            if inc.len() != branches {
                return Err(Error::InvalidTrellis(format!(
                    "state {s} has {} incoming edges, expected {branches}",
                    inc.len()
                )));
            }
        }
        let termination_len = zero_input_termination(&edges, n_states, branches)?;
        Ok(Trellis {
            n_states,
            branches,
            edges,
            incoming,
            termination_len,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// `K`, branches leaving every state.
    pub fn branches(&self) -> usize {
        self.branches
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn edge_id(&self, from: usize, input: usize) -> usize {
        from * self.branches + input
    }

    pub fn incoming(&self, state: usize) -> &[usize] {
        &self.incoming[state]
    }

    /// Zero-input branches needed to return from any state to state 0.
    pub fn termination_len(&self) -> usize {
        self.termination_len
    }

    /// `log2 K`; `K` must be a power of two for bit-level encoding.
    pub fn bits_per_branch(&self) -> usize {
        self.branches.trailing_zeros() as usize
    }

    pub fn has_parallel_transitions(&self) -> bool {
        (0..self.n_states).any(|s| {
            let mut next: Vec<usize> = (0..self.branches)
                .map(|u| self.edges[self.edge_id(s, u)].to)
                .collect();
            next.sort_unstable();
            next.windows(2).any(|w| w[0] == w[1])
        })
    }

    /// Number of terminated paths of `payload` free branches.
    pub fn path_count(&self, payload: usize) -> Option<usize> {
        self.branches.checked_pow(payload as u32)
    }
}

fn zero_input_termination(edges: &[Edge], n_states: usize, branches: usize) -> Result<usize> {
    if edges[0].to != 0 {
        return Err(Error::InvalidTrellis(
            "input 0 from state 0 must stay in state 0".into(),
        ));
    }
    let mut worst = 0;
    for start in 0..n_states {
        let mut s = start;
        let mut steps = 0;
        while s != 0 {
            s = edges[s * branches].to;
            steps += 1;
            if steps > n_states {
                return Err(Error::InvalidTrellis(format!(
                    "zero input from state {start} never reaches state 0"
                )));
            }
        }
        worst = worst.max(steps);
    }
    Ok(worst)
}

/// A trellis whose edges carry the three labellings `X_s1`, `X_s2`, `X_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledTrellis<T: Real> {
    name: String,
    trellis: Trellis,
    labels: Vec<[usize; 3]>,
    constellation: Constellation<T>,
}

impl<T: Real> LabelledTrellis<T> {
    /// `labels[edge_id] = [x_s1, x_s2, x_r]` as constellation indices.
    pub fn new(
        name: impl Into<String>,
        trellis: Trellis,
        labels: Vec<[usize; 3]>,
        constellation: Constellation<T>,
    ) -> Result<Self> {
        if labels.len() != trellis.edges().len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: trellis.edges().len(),
            });
        }
        let m = constellation.size();
        if let Some(bad) = labels.iter().flatten().find(|&&x| x >= m) {
            return Err(Error::IndexOutOfRange { index: *bad, size: m });
        }
        Ok(LabelledTrellis {
            name: name.into(),
            trellis,
            labels,
            constellation,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    pub fn constellation(&self) -> &Constellation<T> {
        &self.constellation
    }

    /// Constellation index carried by `edge` under `which`.
    pub fn label(&self, edge: usize, which: Which) -> usize {
        self.labels[edge][which.slot()]
    }

    pub fn labels(&self) -> &[[usize; 3]] {
        &self.labels
    }

    pub fn symbol(&self, edge: usize, which: Which) -> Complex<T> {
        self.constellation.points()[self.label(edge, which)]
    }

    /// Transmitted symbols of `path` under `which`.
    pub fn symbols(&self, path: &Path, which: Which) -> Vec<Complex<T>> {
        path.edges.iter().map(|&e| self.symbol(e, which)).collect()
    }

    /// How many edges carry each point under `which`.
    pub fn label_histogram(&self, which: Which) -> Vec<usize> {
        let mut h = vec![0; self.constellation.size()];
        for e in 0..self.labels.len() {
            h[self.label(e, which)] += 1;
        }
        h
    }

    /// Every point labels the same number of edges under all three maps.
    pub fn has_uniform_labels(&self) -> bool {
        Which::ALL.iter().all(|&w| {
            let h = self.label_histogram(w);
            h.iter().all(|&c| c == h[0])
        })
    }

    /// Copy with the scheme-level labellings swapped for `triple`; used to
    /// relabel the one-state uncoded trellis.
    pub fn relabel(&self, triple: &LabellingTriple) -> Result<Self> {
        let labels = self
            .labels
            .iter()
            .map(|l| [triple.s1.apply(l[0]), triple.s2.apply(l[1]), triple.r.apply(l[2])])
            .collect();
        LabelledTrellis::new(
            self.name.clone(),
            self.trellis.clone(),
            labels,
            self.constellation.clone(),
        )
    }
}

/// Sequence of connected edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    pub start: usize,
    pub edges: Vec<usize>,
}

impl Path {
    pub fn new(start: usize, edges: Vec<usize>) -> Self {
        Path { start, edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Checks state continuity against `t`.
    pub fn is_connected(&self, t: &Trellis) -> bool {
        let mut s = self.start;
        for &e in &self.edges {
            if e >= t.edges().len() || t.edge(e).from != s {
                return false;
            }
            s = t.edge(e).to;
        }
        true
    }

    pub fn end_state(&self, t: &Trellis) -> usize {
        self.edges.last().map_or(self.start, |&e| t.edge(e).to)
    }

    /// Starts and ends in state 0.
    pub fn is_terminated(&self, t: &Trellis) -> bool {
        self.start == 0 && self.is_connected(t) && self.end_state(t) == 0
    }

    /// State sequence of length `len + 1`.
    pub fn states(&self, t: &Trellis) -> Vec<usize> {
        std::iter::once(self.start)
            .chain(self.edges.iter().map(|&e| t.edge(e).to))
            .collect()
    }

    pub fn inputs<'a>(&'a self, t: &'a Trellis) -> impl Iterator<Item = usize> + 'a {
        self.edges.iter().map(move |&e| t.edge(e).input)
    }
}

fn bits_to_symbol(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b & 1))
}

/// Drives the encoder from state 0 with `bits` (MSB first, `log2 K` bits
/// per branch), then appends zero inputs until state 0 is reached.
pub fn encode_path(t: &Trellis, bits: &[u8]) -> Result<Path> {
    let bpb = t.bits_per_branch();
    if !t.branches().is_power_of_two() || (bpb == 0 && !bits.is_empty()) {
        return Err(Error::InvalidTrellis(format!(
            "{} branches per state cannot carry whole bits",
            t.branches()
        )));
    }
    if bpb > 0 && !bits.len().is_multiple_of(bpb) {
        return Err(Error::BitLength {
            len: bits.len(),
            bits_per_branch: bpb,
        });
    }
    let payload = if bpb == 0 { 0 } else { bits.len() / bpb };
    let mut edges = Vec::with_capacity(payload + t.termination_len());
    let mut state = 0;
    for chunk in bits.chunks(bpb.max(1)).take(payload) {
        let e = t.edge_id(state, bits_to_symbol(chunk));
        edges.push(e);
        state = t.edge(e).to;
    }
    for _ in 0..t.termination_len() {
        let e = t.edge_id(state, 0);
        edges.push(e);
        state = t.edge(e).to;
    }
    debug_assert_eq!(state, 0);
    Ok(Path::new(0, edges))
}

/// Encodes `bits` and returns the path together with the symbols sent under
/// the `which` labelling.
pub fn encode<T: Real>(
    lt: &LabelledTrellis<T>,
    bits: &[u8],
    which: Which,
) -> Result<(Path, Vec<Complex<T>>)> {
    let path = encode_path(lt.trellis(), bits)?;
    let symbols = lt.symbols(&path, which);
    Ok((path, symbols))
}

/// Recovers the payload bits carried by the first `payload_branches` edges.
pub fn path_bits(t: &Trellis, path: &Path, payload_branches: usize) -> Vec<u8> {
    let bpb = t.bits_per_branch();
    let mut out = Vec::with_capacity(payload_branches * bpb);
    for u in path.inputs(t).take(payload_branches) {
        for k in (0..bpb).rev() {
            out.push(((u >> k) & 1) as u8);
        }
    }
    out
}

/// Number of branch positions in which two paths use different edges.
pub fn unmerged_length(p1: &Path, p2: &Path) -> Result<usize> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch {
            left: p1.len(),
            right: p2.len(),
        });
    }
    Ok(p1.edges.iter().zip(&p2.edges).filter(|(a, b)| a != b).count())
}

/// Minimum unmerged length over all path pairs that diverge from a common
/// state and remerge within `horizon` branches.
pub fn code_unmerged_length(t: &Trellis, horizon: usize) -> Result<usize> {
    let n = t.n_states();
    let k = t.branches();
    let mut dist = vec![usize::MAX; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        for u1 in 0..k {
            for u2 in 0..k {
                if u1 == u2 {
                    continue;
                }
                let a = t.edge(t.edge_id(s, u1)).to;
                let b = t.edge(t.edge_id(s, u2)).to;
                if a == b {
                    return Ok(1);
                }
                if dist[a * n + b] == usize::MAX {
                    dist[a * n + b] = 1;
                    queue.push_back((a, b));
                }
            }
        }
    }
    while let Some((a, b)) = queue.pop_front() {
        let d = dist[a * n + b];
        if d >= horizon {
            break;
        }
        for u1 in 0..k {
            for u2 in 0..k {
                let na = t.edge(t.edge_id(a, u1)).to;
                let nb = t.edge(t.edge_id(b, u2)).to;
                if na == nb {
                    return Ok(d + 1);
                }
                if dist[na * n + nb] == usize::MAX {
                    dist[na * n + nb] = d + 1;
                    queue.push_back((na, nb));
                }
            }
        }
    }
    Err(Error::HorizonTooSmall(horizon))
}

/// Default enumeration horizon, `4N` branches.
pub fn default_horizon(t: &Trellis) -> usize {
    4 * t.n_states()
}

/// One-state trellis of the uncoded scheme with `M` parallel edges.
pub(crate) fn one_state_trellis(m: usize) -> Trellis {
    Trellis::from_next_states(vec![vec![0; m]]).expect("one-state trellis is valid")
}

pub(crate) fn uncoded_labels(m: usize, scheme: LabellingScheme) -> Vec<[usize; 3]> {
    let triple = LabellingTriple::for_scheme(scheme, m);
    (0..m)
        .map(|k| [triple.s1.apply(k), triple.s2.apply(k), triple.r.apply(k)])
        .collect()
}
