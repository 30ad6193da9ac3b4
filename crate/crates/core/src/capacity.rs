//! Monte-Carlo capacity bounds of the half-duplex relay channel, with
//! finite PSK alphabets and with Gaussian inputs.
//!
//! Logs are base 2. Expectations over fades use `n_fade` outer draws and,
//! for the finite-alphabet terms, `n_noise` inner noise draws per fade with
//! a uniformly drawn transmitted symbol.

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_gaussian, ChannelParams};
use crate::constellation::{make_psk, Constellation};
use crate::error::{Error, Result};
use crate::rng::{Link, TrialStreams};
use crate::scalar::Real;

/// Smallest accepted number of fade draws.
pub const MIN_SAMPLES: usize = 1000;

/// Mutual-information terms of the finite-alphabet bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MiTerm {
    /// `I(X_s1; Y_r)`.
    R1,
    /// `I(X_s2; Y_d2 | X_r)`.
    R2,
    /// `I(X_s1; Y_d1)`.
    R3,
    /// `I(X_s2, X_r; Y_d2)`.
    R4,
    /// `I(X_s1; Y_r, Y_d1)`.
    R5,
}

impl MiTerm {
    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "CL_CC")]
    LowerCc,
    #[serde(rename = "CU_CC")]
    UpperCc,
    #[serde(rename = "CL_G")]
    LowerGaussian,
    #[serde(rename = "CU_G")]
    UpperGaussian,
    #[serde(rename = "direct_CC")]
    DirectCc,
    #[serde(rename = "direct_G")]
    DirectGaussian,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::LowerCc => "CL_CC",
            BoundKind::UpperCc => "CU_CC",
            BoundKind::LowerGaussian => "CL_G",
            BoundKind::UpperGaussian => "CU_G",
            BoundKind::DirectCc => "direct_CC",
            BoundKind::DirectGaussian => "direct_G",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityPoint {
    pub es_db: f64,
    /// Bits per channel use.
    pub value: f64,
    pub stderr: f64,
    pub kind: BoundKind,
    /// Maximizing power split; Gaussian bounds only.
    pub beta_star: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_fade: usize,
    pub n_noise: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_fade: 2000,
            n_noise: 200,
            seed: 0,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.n_fade < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                got: self.n_fade,
                min: MIN_SAMPLES,
            });
        }
        if self.n_noise == 0 {
            return Err(Error::InvalidParameter("n_noise must be positive".into()));
        }
        Ok(())
    }
}

/// Signal sets used by the source in each phase and by the relay.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabets<T: Real> {
    pub s1: Constellation<T>,
    pub s2: Constellation<T>,
    pub r: Constellation<T>,
}

impl<T: Real> Alphabets<T> {
    /// The same M-PSK set everywhere.
    pub fn psk(m: usize) -> Result<Self> {
        let c = make_psk(m)?;
        Ok(Alphabets {
            s1: c.clone(),
            s2: c.clone(),
            r: c,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub stderr: T,
}

fn mean_and_stderr<T: Real>(xs: &[T]) -> Estimate<T> {
    let n = T::from_usize(xs.len()).expect("sample count fits");
    let mean = xs.iter().copied().sum::<T>() / n;
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (n - T::one()).max(T::one());
    Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    }
}

/// `log2 Σ_k exp(a_k)` without overflow.
fn log2_sum_exp<T: Real>(a: impl Iterator<Item = T> + Clone) -> T {
    let top = a.clone().fold(T::neg_infinity(), T::max);
    let s: T = a.map(|x| (x - top).exp()).sum();
    (top + s.ln()) / T::LN_2()
}

/// One fade draw's inner noise average of the log-ratio.
fn inner_average<T: Real>(
    which: MiTerm,
    alph: &Alphabets<T>,
    amp: T,
    params: &ChannelParams<T>,
    streams: &TrialStreams,
    n_noise: usize,
) -> T {
    let mut fr = streams.get(Link::FadeSr);
    let mut fd = streams.get(Link::FadeSd1);
    let mut fdr = streams.get(Link::FadeRd);
    let h_sr = complex_gaussian(&mut fr, params.sigma2_sr) * amp;
    let h_sd = complex_gaussian(&mut fd, params.sigma2_sd) * amp;
    let h_rd = complex_gaussian(&mut fdr, params.sigma2_rd) * amp;
    let mut n1 = streams.get(Link::NoiseR);
    let mut n2 = streams.get(Link::NoiseD1);
    let mut pick = streams.get(Link::Data);
    let mut acc = T::zero();
    let single = |h: Complex<T>, set: &Constellation<T>, z: Complex<T>, i1: usize| {
        let x1 = set.points()[i1];
        log2_sum_exp(
            set.points()
                .iter()
                .map(move |&x| z.norm_sqr() - (z + h * (x1 - x)).norm_sqr()),
        )
    };
    for _ in 0..n_noise {
        let z1: Complex<T> = complex_gaussian(&mut n1, T::one());
        let z2: Complex<T> = complex_gaussian(&mut n2, T::one());
        acc = acc
            + match which {
                MiTerm::R1 => single(h_sr, &alph.s1, z1, pick.random_range(0..alph.s1.size())),
                MiTerm::R2 => single(h_sd, &alph.s2, z1, pick.random_range(0..alph.s2.size())),
                MiTerm::R3 => single(h_sd, &alph.s1, z1, pick.random_range(0..alph.s1.size())),
                MiTerm::R4 => {
                    let i1 = pick.random_range(0..alph.s2.size());
                    let j1 = pick.random_range(0..alph.r.size());
                    let (xs, xr) = (alph.s2.points(), alph.r.points());
                    let base = h_sd * xs[i1] + h_rd * xr[j1];
                    log2_sum_exp(xs.iter().flat_map(|&a| {
                        xr.iter().map(move |&b| {
                            z1.norm_sqr() - (z1 + base - h_sd * a - h_rd * b).norm_sqr()
                        })
                    }))
                }
                MiTerm::R5 => {
                    let i1 = pick.random_range(0..alph.s1.size());
                    let x1 = alph.s1.points()[i1];
                    log2_sum_exp(alph.s1.points().iter().map(|&x| {
                        z1.norm_sqr() + z2.norm_sqr()
                            - (z1 + h_sr * (x1 - x)).norm_sqr()
                            - (z2 + h_sd * (x1 - x)).norm_sqr()
                    }))
                }
            };
    }
    acc / T::from_usize(n_noise).expect("count fits")
}

fn alphabet_size<T: Real>(which: MiTerm, alph: &Alphabets<T>) -> usize {
    match which {
        MiTerm::R1 | MiTerm::R3 | MiTerm::R5 => alph.s1.size(),
        MiTerm::R2 => alph.s2.size(),
        MiTerm::R4 => alph.s2.size() * alph.r.size(),
    }
}

/// Fade-averaged mutual information of one term, in bits.
pub fn mi_term<T: Real>(
    which: MiTerm,
    alph: &Alphabets<T>,
    params: &ChannelParams<T>,
    cfg: &McConfig,
) -> Result<Estimate<T>> {
    cfg.validate()?;
    let amp = params.amplitude();
    let log_m = T::from_usize(alphabet_size(which, alph)).expect("size fits").log2();
    let samples: Vec<T> = (0..cfg.n_fade as u64)
        .into_par_iter()
        .map(|f| {
            let streams = TrialStreams::new(cfg.seed, (which.tag() << 40) | f);
            log_m - inner_average(which, alph, amp, params, &streams, cfg.n_noise)
        })
        .collect();
    let e = mean_and_stderr(&samples);
    Ok(Estimate {
        value: e.value.max(T::zero()).min(log_m),
        stderr: e.stderr,
    })
}

fn half_sum<T: Real>(a: Estimate<T>, b: Estimate<T>) -> Estimate<T> {
    let h = T::lit(0.5);
    Estimate {
        value: h * (a.value + b.value),
        stderr: h * (a.stderr * a.stderr + b.stderr * b.stderr).sqrt(),
    }
}

fn point<T: Real>(es_db: T, e: Estimate<T>, kind: BoundKind, beta: Option<T>) -> CapacityPoint {
    CapacityPoint {
        es_db: es_db.as_f64(),
        value: e.value.as_f64(),
        stderr: e.stderr.as_f64(),
        kind,
        beta_star: beta.map(Real::as_f64),
    }
}

fn smaller<T: Real>(a: Estimate<T>, b: Estimate<T>) -> Estimate<T> {
    if b.value < a.value {
        b
    } else {
        a
    }
}

/// `C_L = min{½E[R1] + ½E[R2], ½E[R3] + ½E[R4]}` and the same with `R5`
/// in place of `R1` for `C_U`.
pub fn cc_bounds<T: Real>(
    params: &ChannelParams<T>,
    alph: &Alphabets<T>,
    cfg: &McConfig,
) -> Result<(CapacityPoint, CapacityPoint)> {
    let r = |w| mi_term(w, alph, params, cfg);
    let (r1, r2, r3, r4, r5) = (r(MiTerm::R1)?, r(MiTerm::R2)?, r(MiTerm::R3)?, r(MiTerm::R4)?, r(MiTerm::R5)?);
    let dest = half_sum(r3, r4);
    let lower = smaller(half_sum(r1, r2), dest);
    let upper = smaller(half_sum(r5, r2), dest);
    Ok((
        point(params.es_db, lower, BoundKind::LowerCc, None),
        point(params.es_db, upper, BoundKind::UpperCc, None),
    ))
}

/// `β` values `0, 0.05, …, 1`.
pub fn default_beta_grid() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

fn c2<T: Real>(x: T) -> T {
    (T::one() + x).log2()
}

/// Gaussian-input bounds maximized over `beta_grid`:
///
/// `C_L = ½ max_β min{E[C(|h_sr|²E)] + E[C((1-β)|h_sd|²E)],
///                    E[C(|h_sd|²E)] + E[C((|h_sd|² + |h_rd|² + 2√β|h_sd||h_rd|)E)]}`
///
/// and `C_U` with `E[C((|h_sd|² + |h_sr|²)E)]` as the first term.
pub fn gaussian_bounds<T: Real>(
    params: &ChannelParams<T>,
    beta_grid: &[T],
    cfg: &McConfig,
) -> Result<(CapacityPoint, CapacityPoint)> {
    cfg.validate()?;
    if beta_grid.is_empty() {
        return Err(Error::InvalidParameter("empty beta grid".into()));
    }
    if let Some(b) = beta_grid.iter().find(|&&b| !(b >= T::zero() && b <= T::one())) {
        return Err(Error::InvalidParameter(format!("beta {b} outside [0, 1]")));
    }
    let es = params.es();
    let fades: Vec<(T, T, T)> = (0..cfg.n_fade as u64)
        .map(|f| {
            let s = TrialStreams::new(cfg.seed, f);
            let g = |link, var| complex_gaussian::<T, _>(&mut s.get(link), var).norm_sqr();
            (
                g(Link::FadeSr, params.sigma2_sr),
                g(Link::FadeSd1, params.sigma2_sd),
                g(Link::FadeRd, params.sigma2_rd),
            )
        })
        .collect();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut best: [Option<(Estimate<T>, T)>; 2] = [None, None];
    for &beta in beta_grid {
        let mut cuts = [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]];
        for &(sr, sd, rd) in &fades {
            let coop = c2((sd + rd + two * beta.sqrt() * (sd * rd).sqrt()) * es);
            let new_info = c2((T::one() - beta) * sd * es);
            let dest = half * (c2(sd * es) + coop);
            cuts[0][0].push(half * (c2(sr * es) + new_info));
            cuts[1][0].push(half * (c2((sd + sr) * es) + new_info));
            cuts[0][1].push(dest);
            cuts[1][1].push(dest);
        }
        for (slot, [a, b]) in best.iter_mut().zip(cuts) {
            let v = smaller(mean_and_stderr(&a), mean_and_stderr(&b));
            if slot.is_none_or(|(cur, _)| v.value > cur.value) {
                *slot = Some((v, beta));
            }
        }
    }
    let [(lo, bl), (up, bu)] = best.map(|b| b.expect("grid is nonempty"));
    Ok((
        point(params.es_db, lo, BoundKind::LowerGaussian, Some(bl)),
        point(params.es_db, up, BoundKind::UpperGaussian, Some(bu)),
    ))
}

/// Direct S-D transmission without relay: `E[R3]` for the finite alphabet
/// and `E[C(|h_sd|²E)]` for Gaussian inputs.
pub fn direct_bounds<T: Real>(
    params: &ChannelParams<T>,
    alph: &Alphabets<T>,
    cfg: &McConfig,
) -> Result<(CapacityPoint, CapacityPoint)> {
    let cc = mi_term(MiTerm::R3, alph, params, cfg)?;
    let es = params.es();
    let g: Vec<T> = (0..cfg.n_fade as u64)
        .map(|f| {
            let mut r = TrialStreams::new(cfg.seed, f).get(Link::FadeSd1);
            c2(complex_gaussian::<T, _>(&mut r, params.sigma2_sd).norm_sqr() * es)
        })
        .collect();
    Ok((
        point(params.es_db, cc, BoundKind::DirectCc, None),
        point(params.es_db, mean_and_stderr(&g), BoundKind::DirectGaussian, None),
    ))
}

/// First `E_S` where a curve sampled at increasing `E_S` reaches `target`,
/// by linear interpolation.
pub fn crossing(points: &[(f64, f64)], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 <= target && y1 >= target && y1 > y0 {
            Some(x0 + (target - y0) * (x1 - x0) / (y1 - y0))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> McConfig {
        McConfig {
            n_fade: 1000,
            n_noise: 20,
            seed: 3,
        }
    }

    #[test]
    fn rejects_small_sample_counts() {
        let p = ChannelParams::from_db(0.0, 15.0, 15.0, 5.0).unwrap();
        let a = Alphabets::<f64>::psk(4).unwrap();
        let small = McConfig { n_fade: 999, ..cfg() };
        assert_eq!(
            mi_term(MiTerm::R1, &a, &p, &small).unwrap_err(),
            Error::TooFewSamples { got: 999, min: 1000 }
        );
        assert!(gaussian_bounds(&p, &[], &cfg()).is_err());
        assert!(gaussian_bounds(&p, &[1.5], &cfg()).is_err());
    }

    #[test]
    fn saturation_and_silence() {
        let a = Alphabets::<f64>::psk(4).unwrap();
        let loud = ChannelParams::from_db(0.0, 0.0, 0.0, 60.0).unwrap();
        let r = mi_term(MiTerm::R1, &a, &loud, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 0.01, "{}", r.value);
        let quiet = ChannelParams::new(1e-12, 1e-12, 1e-12, 0.0).unwrap();
        let r = mi_term(MiTerm::R1, &a, &quiet, &cfg()).unwrap();
        assert!(r.value < 1e-6);
    }

    #[test]
    fn deterministic_under_parallelism() {
        let a = Alphabets::<f64>::psk(8).unwrap();
        let p = ChannelParams::from_db(0.0, 15.0, 15.0, 3.0).unwrap();
        let x = mi_term(MiTerm::R4, &a, &p, &cfg()).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let y = pool.install(|| mi_term(MiTerm::R4, &a, &p, &cfg()).unwrap());
        assert_eq!(x, y);
    }

    #[test]
    fn crossing_interpolates() {
        let pts = [(0.0, 0.2), (2.0, 0.8), (4.0, 1.2)];
        assert_eq!(crossing(&pts, 1.0), Some(3.0));
        assert_eq!(crossing(&pts, 2.0), None);
    }
}
