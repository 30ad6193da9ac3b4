//! Reference computations written independently of the library's decoders
//! and bounds. They only read the raw next-state table and edge labels.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use relay_tcm::trellis::LabelledTrellis;

pub fn psk(m: usize, k: usize) -> C {
    C::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64)
}

/// Edge table `(from, to, [xs1, xs2, xr])` copied out of the trellis.
pub struct Raw {
    pub m: usize,
    pub edges: Vec<(usize, usize, [usize; 3])>,
}

impl Raw {
    pub fn of(lt: &LabelledTrellis<f64>) -> Raw {
        let t = lt.trellis();
        Raw {
            m: lt.constellation().size(),
            edges: (0..t.edges().len())
                .map(|e| (t.edge(e).from, t.edge(e).to, lt.labels()[e]))
                .collect(),
        }
    }

    pub fn sym(&self, e: usize, slot: usize) -> C {
        psk(self.m, self.edges[e].2[slot])
    }

    /// All edge sequences of length `len` from state 0 back to state 0,
    /// by filtering every edge sequence with matching endpoints.
    pub fn paths(&self, len: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<(Vec<usize>, usize)> = vec![(vec![], 0)];
        for _ in 0..len {
            let mut next = Vec::new();
            for (p, s) in &out {
                for (e, &(from, to, _)) in self.edges.iter().enumerate() {
                    if from == *s {
                        let mut q = p.clone();
                        q.push(e);
                        next.push((q, to));
                    }
                }
            }
            out = next;
        }
        out.into_iter().filter(|(_, s)| *s == 0).map(|(p, _)| p).collect()
    }
}

/// Random fades and observations for exhaustive checks.
pub struct Instance {
    pub amp: f64,
    pub h_sr: Vec<C>,
    pub h_sd1: Vec<C>,
    pub h_sd2: Vec<C>,
    pub h_rd: Vec<C>,
    pub y_r: Vec<C>,
    pub y_d1: Vec<C>,
    pub y_d2: Vec<C>,
}

fn cn(rng: &mut ChaCha20Rng, s: f64) -> C {
    // crude but independent of the library's Gaussian sampler
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random();
    let r = (-u1.ln()).sqrt() * s;
    C::from_polar(r, 2.0 * std::f64::consts::PI * u2)
}

impl Instance {
    /// Transmits `ps` (and `ps` again from the relay) at `amp`, with
    /// fades and noise drawn from `seed`.
    pub fn random(raw: &Raw, ps: &[usize], amp: f64, seed: u64) -> Instance {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let len = ps.len();
        let mut v = |s: f64| -> Vec<C> { (0..len).map(|_| cn(&mut rng, s)).collect() };
        let (h_sr, h_sd1, h_sd2, h_rd) = (v(3.0), v(1.0), v(1.0), v(3.0));
        let (z_r, z_d1, z_d2) = (v(1.0), v(1.0), v(1.0));
        let x = |i: usize, slot| raw.sym(ps[i], slot) * amp;
        let y_r = (0..len).map(|i| h_sr[i] * x(i, 0) + z_r[i]).collect();
        let y_d1 = (0..len).map(|i| h_sd1[i] * x(i, 0) + z_d1[i]).collect();
        let y_d2 = (0..len)
            .map(|i| h_sd2[i] * x(i, 1) + h_rd[i] * x(i, 2) + z_d2[i])
            .collect();
        Instance { amp, h_sr, h_sd1, h_sd2, h_rd, y_r, y_d1, y_d2 }
    }

    pub fn realization(&self) -> relay_tcm::channel::ChannelRealization<f64> {
        let zero = vec![C::new(0.0, 0.0); self.h_sr.len()];
        relay_tcm::channel::ChannelRealization {
            h_sr: self.h_sr.clone(),
            h_sd1: self.h_sd1.clone(),
            h_sd2: self.h_sd2.clone(),
            h_rd: self.h_rd.clone(),
            z_r: zero.clone(),
            z_d1: zero.clone(),
            z_d2: zero,
        }
    }

    pub fn relay_metric(&self, raw: &Raw, p: &[usize]) -> f64 {
        p.iter()
            .enumerate()
            .map(|(i, &e)| (self.y_r[i] - self.h_sr[i] * raw.sym(e, 0) * self.amp).norm_sqr())
            .sum()
    }

    pub fn phi(&self, raw: &Raw, ps: &[usize], pr: &[usize]) -> f64 {
        let a = self.amp;
        (0..ps.len())
            .map(|i| {
                let (s1, s2) = (raw.sym(ps[i], 0) * a, raw.sym(ps[i], 1) * a);
                let (r1, rr) = (raw.sym(pr[i], 0) * a, raw.sym(pr[i], 2) * a);
                (self.y_d1[i] - self.h_sd1[i] * s1).norm_sqr()
                    + (self.y_d2[i] - self.h_sd2[i] * s2 - self.h_rd[i] * rr).norm_sqr()
                    + 0.25 * self.h_sr[i].norm_sqr() * (s1 - r1).norm_sqr()
            })
            .sum()
    }
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}
