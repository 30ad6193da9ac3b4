//! M-PSK signal sets, index-level labellings and distance utilities.
//!
//! Points are stored at unit energy. The symbol energy `E_S` is applied by
//! the channel, so every distance computed here is scale free.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Absolute tolerance for floating comparisons of distances.
pub const DIST_TOL: f64 = 1e-9;

/// Ordered M-PSK signal set, `points[k] = exp(j·2πk/M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T: Real> {
    points: Vec<Complex<T>>,
}

/// Builds the unit-energy M-PSK set in index order.
pub fn make_psk<T: Real>(m: usize) -> Result<Constellation<T>> {
    if m < 4 || !m.is_power_of_two() {
        return Err(Error::InvalidConstellationSize(m));
    }
    let step = T::TAU() / T::lit(m as f64);
    let points = (0..m)
        .map(|k| Complex::from_polar(T::one(), step * T::lit(k as f64)))
        .collect();
    Ok(Constellation { points })
}

impl<T: Real> Constellation<T> {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn point(&self, k: usize) -> Result<Complex<T>> {
        self.points.get(k).copied().ok_or(Error::IndexOutOfRange {
            index: k,
            size: self.size(),
        })
    }

    /// `log2(M)`.
    pub fn bits_per_symbol(&self) -> usize {
        self.size().trailing_zeros() as usize
    }

    /// Same geometry with every point multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        Constellation {
            points: self.points.iter().map(|p| p * c).collect(),
        }
    }

    /// Distinct nonzero squared distances, ascending.
    pub fn distance_spectrum(&self) -> DistanceSpectrum<T> {
        let mut deltas: Vec<T> = Vec::new();
        for j in 1..self.size() {
            let d = (self.points[0] - self.points[j]).norm_sqr();
            if !deltas
                .iter()
                .any(|&x| (x - d).abs() < T::lit(DIST_TOL))
            {
                deltas.push(d);
            }
        }
        deltas.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        DistanceSpectrum { deltas }
    }
}

/// `|points[i] − points[j]|²`.
pub fn squared_distance<T: Real>(c: &Constellation<T>, i: usize, j: usize) -> Result<T> {
    Ok((c.point(i)? - c.point(j)?).norm_sqr())
}

/// Ascending list of distinct squared Euclidean distances of a signal set.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSpectrum<T: Real> {
    pub deltas: Vec<T>,
}

/// Permutation of `0..M` mapping a message (or edge label) to a point index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labelling {
    pub name: String,
    pub map: Vec<usize>,
}

impl Labelling {
    pub fn new(name: impl Into<String>, map: Vec<usize>) -> Result<Self> {
        let lab = Labelling {
            name: name.into(),
            map,
        };
        if !lab.is_bijection() {
            return Err(Error::NotABijection(lab.map.len()));
        }
        Ok(lab)
    }

    pub fn size(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.map[k]
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.map.len()];
        for &k in &self.map {
            if k >= seen.len() || seen[k] {
                return false;
            }
            seen[k] = true;
        }
        true
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Labelling) -> Labelling {
        Labelling {
            name: format!("{}∘{}", self.name, other.name),
            map: other.map.iter().map(|&k| self.map[k]).collect(),
        }
    }
}

/// Constant labelling `k ↦ k`.
pub fn identity_labelling(m: usize) -> Labelling {
    Labelling {
        name: "identity".into(),
        map: (0..m).collect(),
    }
}

/// Relay map of the improved uncoded scheme: even indices stay put, odd
/// indices jump to the antipodal point `(k + M/2) mod M`.
pub fn bar_labelling(m: usize) -> Labelling {
    Labelling {
        name: "bar".into(),
        map: (0..m)
            .map(|k| if k % 2 == 0 { k } else { (k + m / 2) % m })
            .collect(),
    }
}

/// Which labelling family the uncoded scheme uses at S and R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabellingScheme {
    /// Same map at S (both phases) and R.
    Constant,
    /// Identity at S, [`bar_labelling`] at R.
    Bar,
}

/// The three maps `(X_s1, X_s2, X_r)` used by one transmission scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabellingTriple {
    pub s1: Labelling,
    pub s2: Labelling,
    pub r: Labelling,
}

impl LabellingTriple {
    pub fn for_scheme(scheme: LabellingScheme, m: usize) -> Self {
        let relay = match scheme {
            LabellingScheme::Constant => identity_labelling(m),
            LabellingScheme::Bar => bar_labelling(m),
        };
        LabellingTriple {
            s1: identity_labelling(m),
            s2: identity_labelling(m),
            r: relay,
        }
    }
}
