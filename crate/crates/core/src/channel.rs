//! Two-phase Rayleigh fading relay channel.
//!
//! Phase 1: `Y_r = h_sr x_s1 + z_r`, `Y_d1 = h_sd1 x_s1 + z_d1`.
//! Phase 2: `Y_d2 = h_sd2 x_s2 + h_rd x_r + z_d2`.
//!
//! Fades are `CN(0, σ²)` with the per-link variance, noise is `CN(0, 1)`.
//! The symbol energy enters only through the amplitude `√E_S` applied to
//! the unit-energy PSK symbols.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codemetrics::GammaRatio;
use crate::error::{Error, Result};
use crate::rng::{Link, TrialStreams};
use crate::scalar::{db_to_linear, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum FadingMode {
    /// Independent fade per symbol (ideal interleaving).
    #[default]
    Iid,
    /// Fades constant over `depth` consecutive transmitted symbols, seen
    /// through a block interleaver with `depth` columns.
    Block { depth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<T: Real> {
    pub sigma2_sd: T,
    pub sigma2_sr: T,
    pub sigma2_rd: T,
    pub es_db: T,
    pub fading_mode: FadingMode,
}

impl<T: Real> ChannelParams<T> {
    /// Linear variances and `E_S` in dB.
    pub fn new(sigma2_sd: T, sigma2_sr: T, sigma2_rd: T, es_db: T) -> Result<Self> {
        for (name, v) in [("sd", sigma2_sd), ("sr", sigma2_sr), ("rd", sigma2_rd)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "fade variance sigma2_{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !es_db.is_finite() {
            return Err(Error::InvalidParameter(format!("es_db must be finite, got {es_db}")));
        }
        Ok(ChannelParams {
            sigma2_sd,
            sigma2_sr,
            sigma2_rd,
            es_db,
            fading_mode: FadingMode::Iid,
        })
    }

    /// All quantities in dB.
    pub fn from_db(sd_db: T, sr_db: T, rd_db: T, es_db: T) -> Result<Self> {
        Self::new(db_to_linear(sd_db), db_to_linear(sr_db), db_to_linear(rd_db), es_db)
    }

    pub fn with_es_db(mut self, es_db: T) -> Self {
        self.es_db = es_db;
        self
    }

    pub fn with_fading(mut self, mode: FadingMode) -> Result<Self> {
        if let FadingMode::Block { depth: 0 } = mode {
            return Err(Error::InvalidParameter("interleaver depth must be positive".into()));
        }
        self.fading_mode = mode;
        Ok(self)
    }

    /// `E_S` on a linear scale.
    pub fn es(&self) -> T {
        db_to_linear(self.es_db)
    }

    /// `√E_S`, the factor applied to unit-energy symbols.
    pub fn amplitude(&self) -> T {
        self.es().sqrt()
    }

    pub fn gamma(&self) -> GammaRatio<T> {
        GammaRatio::from_variances(self.sigma2_sd, self.sigma2_rd)
            .expect("variances validated at construction")
    }

    /// Multiplies unit-energy symbols by `√E_S`.
    pub fn scale(&self, symbols: &[Complex<T>]) -> Vec<Complex<T>> {
        let a = self.amplitude();
        symbols.iter().map(|&x| x * a).collect()
    }
}

/// Draw from `CN(0, var)`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, var: T) -> Complex<T> {
    let s = (var / T::lit(2.0)).sqrt();
    Complex::new(T::std_normal(rng) * s, T::std_normal(rng) * s)
}

/// Fades and noise for one frame, in code (deinterleaved) order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T: Real> {
    pub h_sr: Vec<Complex<T>>,
    pub h_sd1: Vec<Complex<T>>,
    pub h_sd2: Vec<Complex<T>>,
    pub h_rd: Vec<Complex<T>>,
    pub z_r: Vec<Complex<T>>,
    pub z_d1: Vec<Complex<T>>,
    pub z_d2: Vec<Complex<T>>,
}

impl<T: Real> ChannelRealization<T> {
    pub fn len(&self) -> usize {
        self.h_sr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_sr.is_empty()
    }

    /// Every fade equal to `h` and no noise.
    pub fn constant(len: usize, h: Complex<T>) -> Self {
        let v = vec![h; len];
        let z = vec![Complex::new(T::zero(), T::zero()); len];
        ChannelRealization {
            h_sr: v.clone(),
            h_sd1: v.clone(),
            h_sd2: v.clone(),
            h_rd: v,
            z_r: z.clone(),
            z_d1: z.clone(),
            z_d2: z,
        }
    }

    /// Same fades with the noise removed.
    pub fn without_noise(mut self) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        for z in [&mut self.z_r, &mut self.z_d1, &mut self.z_d2] {
            z.iter_mut().for_each(|x| *x = zero);
        }
        self
    }
}

fn draw_fades<T: Real, R: Rng>(rng: &mut R, var: T, len: usize, mode: FadingMode) -> Vec<Complex<T>> {
    match mode {
        FadingMode::Iid => (0..len).map(|_| complex_gaussian(rng, var)).collect(),
        FadingMode::Block { depth } => {
            let padded = len.div_ceil(depth) * depth;
            let blocks = padded / depth;
            let mut sent = Vec::with_capacity(padded);
            for _ in 0..blocks {
                let h = complex_gaussian(rng, var);
                sent.extend(std::iter::repeat_n(h, depth));
            }
            let mut code = deinterleave(&sent, depth).expect("padded to a multiple of depth");
            code.truncate(len);
            code
        }
    }
}

fn draw_noise<T: Real, R: Rng>(rng: &mut R, len: usize) -> Vec<Complex<T>> {
    (0..len).map(|_| complex_gaussian(rng, T::one())).collect()
}

/// Draws fades and noise for a frame of `len` symbols per phase.
///
/// Each of the seven sequences comes from its own stream, so the draws of
/// one link do not depend on the others or on the fading mode of the rest.
pub fn draw_realization<T: Real>(
    params: &ChannelParams<T>,
    len: usize,
    streams: &TrialStreams,
) -> ChannelRealization<T> {
    let mode = params.fading_mode;
    let fade = |link, var| draw_fades(&mut streams.get(link), var, len, mode);
    let noise = |link| draw_noise(&mut streams.get(link), len);
    ChannelRealization {
        h_sr: fade(Link::FadeSr, params.sigma2_sr),
        h_sd1: fade(Link::FadeSd1, params.sigma2_sd),
        h_sd2: fade(Link::FadeSd2, params.sigma2_sd),
        h_rd: fade(Link::FadeRd, params.sigma2_rd),
        z_r: noise(Link::NoiseR),
        z_d1: noise(Link::NoiseD1),
        z_d2: noise(Link::NoiseD2),
    }
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::LengthMismatch { left: got, right: want });
    }
    Ok(())
}

/// Phase-1 observations `(Y_r, Y_d1)` of already scaled symbols.
pub fn phase1<T: Real>(
    symbols_s1: &[Complex<T>],
    h: &ChannelRealization<T>,
) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
    check_len(symbols_s1.len(), h.len())?;
    let y_r = symbols_s1
        .iter()
        .zip(&h.h_sr)
        .zip(&h.z_r)
        .map(|((&x, &g), &z)| g * x + z)
        .collect();
    let y_d1 = symbols_s1
        .iter()
        .zip(&h.h_sd1)
        .zip(&h.z_d1)
        .map(|((&x, &g), &z)| g * x + z)
        .collect();
    Ok((y_r, y_d1))
}

/// Phase-2 observation `Y_d2` of already scaled symbols.
pub fn phase2<T: Real>(
    symbols_s2: &[Complex<T>],
    symbols_r: &[Complex<T>],
    h: &ChannelRealization<T>,
) -> Result<Vec<Complex<T>>> {
    check_len(symbols_s2.len(), h.len())?;
    check_len(symbols_r.len(), h.len())?;
    Ok((0..h.len())
        .map(|i| h.h_sd2[i] * symbols_s2[i] + h.h_rd[i] * symbols_r[i] + h.z_d2[i])
        .collect())
}

fn check_depth(len: usize, depth: usize) -> Result<usize> {
    if depth == 0 {
        return Err(Error::InvalidParameter("interleaver depth must be positive".into()));
    }
    if !len.is_multiple_of(depth) {
        return Err(Error::InvalidParameter(format!(
            "sequence length {len} is not a multiple of the interleaver depth {depth}"
        )));
    }
    Ok(len / depth)
}

/// Block interleaver: writes `seq` row by row into a matrix with `depth`
/// columns and reads it out column by column.
///
/// The length must be a multiple of `depth`; callers pad first.
pub fn interleave<X: Clone>(seq: &[X], depth: usize) -> Result<Vec<X>> {
    let rows = check_depth(seq.len(), depth)?;
    Ok((0..seq.len())
        .map(|j| seq[(j % rows) * depth + j / rows].clone())
        .collect())
}

/// Inverse of [`interleave`].
pub fn deinterleave<X: Clone>(seq: &[X], depth: usize) -> Result<Vec<X>> {
    let rows = check_depth(seq.len(), depth)?;
    Ok((0..seq.len())
        .map(|i| seq[(i % depth) * rows + i / depth].clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ChannelParams<f64> {
        ChannelParams::from_db(0.0, 15.0, 15.0, 0.0).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ChannelParams::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(ChannelParams::new(1.0, f64::NAN, 1.0, 0.0).is_err());
        assert!(params().with_fading(FadingMode::Block { depth: 0 }).is_err());
        assert!((params().gamma().get() - 10f64.powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn noiseless_unit_fades_pass_symbols() {
        let h = ChannelRealization::constant(3, Complex::new(1.0, 0.0));
        let x: Vec<Complex<f64>> = (0..3).map(|k| Complex::from_polar(1.0, k as f64)).collect();
        let (yr, yd1) = phase1(&x, &h).unwrap();
        assert_eq!(yr, x);
        assert_eq!(yd1, x);
        let zero = vec![Complex::new(0.0, 0.0); 3];
        assert_eq!(phase2(&x, &zero, &h).unwrap(), x);
        assert!(phase1(&x[..2], &h).is_err());
    }

    #[test]
    fn interleaver_index_map() {
        let x: Vec<usize> = (0..6).collect();
        assert_eq!(interleave(&x, 1).unwrap(), x);
        assert_eq!(interleave(&x, 6).unwrap(), x);
        // 2 rows, 3 columns: rows [0 1 2] [3 4 5] read by column
        assert_eq!(interleave(&x, 3).unwrap(), vec![0, 3, 1, 4, 2, 5]);
        assert_eq!(deinterleave(&interleave(&x, 2).unwrap(), 2).unwrap(), x);
        assert!(interleave(&x, 4).is_err());
        assert!(interleave(&x, 0).is_err());
    }

    #[test]
    fn block_mode_spreads_adjacent_symbols() {
        let p = params().with_fading(FadingMode::Block { depth: 4 }).unwrap();
        let h = draw_realization(&p, 16, &TrialStreams::new(1, 0));
        // code positions 4 apart share a transmitted block
        for i in 0..12 {
            assert_eq!(h.h_sr[i], h.h_sr[i + 4]);
            if i % 4 != 3 {
                assert_ne!(h.h_sr[i], h.h_sr[i + 1]);
            }
        }
        let short = draw_realization(&p, 10, &TrialStreams::new(1, 0));
        assert_eq!(short.len(), 10);
    }

    #[test]
    fn same_seed_same_realization() {
        let s = TrialStreams::new(42, 9);
        assert_eq!(draw_realization(&params(), 50, &s), draw_realization(&params(), 50, &s));
        assert_ne!(
            draw_realization(&params(), 50, &s),
            draw_realization(&params(), 50, &TrialStreams::new(42, 10))
        );
    }
}
