use crate::scalar::Real;

use super::{LabelledTrellis, Which};

/// Edge `{e_a, e_b}` of the product trellis.
///
/// `e_a` is the source path hypothesis, `e_b` the relay path hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductEdge {
    pub from: usize,
    pub to: usize,
    pub ea: usize,
    pub eb: usize,
    /// `(X_s1(e_a), X_s2(e_a), X_s1(e_b), X_r(e_b))`.
    pub labels: [usize; 4],
}

/// Trellis on state pairs `[a, b]`, indexed `a * N + b`.
///
/// Edge ids are `pair * K² + u_a * K + u_b`, which is lexicographic in
/// `(a, b)` and then `(e_a, e_b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductTrellis {
    n_base: usize,
    k_base: usize,
    edges: Vec<ProductEdge>,
    incoming: Vec<Vec<usize>>,
}

impl ProductTrellis {
    pub fn n_states(&self) -> usize {
        self.n_base * self.n_base
    }

    pub fn branches(&self) -> usize {
        self.k_base * self.k_base
    }

    pub fn pair_index(&self, a: usize, b: usize) -> usize {
        a * self.n_base + b
    }

    pub fn pair(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_base, idx % self.n_base)
    }

    pub fn edges(&self) -> &[ProductEdge] {
        &self.edges
    }

    pub fn outgoing(&self, state: usize) -> &[ProductEdge] {
        let k2 = self.branches();
        &self.edges[state * k2..(state + 1) * k2]
    }

    /// Ids of edges entering `state`, ascending.
    pub fn incoming(&self, state: usize) -> &[usize] {
        &self.incoming[state]
    }
}

pub fn build_product_trellis<T: Real>(lt: &LabelledTrellis<T>) -> ProductTrellis {
    let t = lt.trellis();
    let (n, k) = (t.n_states(), t.branches());
    let mut edges = Vec::with_capacity(n * n * k * k);
    let mut incoming = vec![Vec::with_capacity(k * k); n * n];
    for a in 0..n {
        for b in 0..n {
            for ua in 0..k {
                for ub in 0..k {
                    let ea = t.edge_id(a, ua);
                    let eb = t.edge_id(b, ub);
                    let to = t.edge(ea).to * n + t.edge(eb).to;
                    incoming[to].push(edges.len());
                    edges.push(ProductEdge {
                        from: a * n + b,
                        to,
                        ea,
                        eb,
                        labels: [
                            lt.label(ea, Which::S1),
                            lt.label(ea, Which::S2),
                            lt.label(eb, Which::S1),
                            lt.label(eb, Which::R),
                        ],
                    });
                }
            }
        }
    }
    ProductTrellis {
        n_base: n,
        k_base: k,
        edges,
        incoming,
    }
}
