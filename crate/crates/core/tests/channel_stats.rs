use num_complex::Complex64 as C;
use relay_tcm::channel::{
    deinterleave, draw_realization, interleave, phase1, phase2, ChannelParams, ChannelRealization,
    FadingMode,
};
use relay_tcm::rng::TrialStreams;

const N: usize = 1_000_000;

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Normalized correlation `|E[a b*]| / sqrt(E|a|² E|b|²)`.
fn corr(a: &[C], b: &[C]) -> f64 {
    let num: C = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<C>() / a.len() as f64;
    let pa = mean(a.iter().map(|x| x.norm_sqr()));
    let pb = mean(b.iter().map(|x| x.norm_sqr()));
    num.norm() / (pa * pb).sqrt()
}

fn params(es_db: f64) -> ChannelParams<f64> {
    ChannelParams::from_db(0.0, 15.0, 15.0, es_db).unwrap()
}

#[test]
fn fade_power_and_independence() {
    let h = draw_realization(&params(0.0), N, &TrialStreams::new(11, 0));
    let p_sr = mean(h.h_sr.iter().map(|x| x.norm_sqr()));
    assert!((p_sr / 10f64.powf(1.5) - 1.0).abs() < 0.01, "{p_sr}");
    let p_sd = mean(h.h_sd1.iter().map(|x| x.norm_sqr()));
    assert!((p_sd - 1.0).abs() < 0.01);
    assert!(corr(&h.h_sd1[1..], &h.h_sd1[..N - 1]) < 0.01);
    assert!(corr(&h.z_r, &h.z_d2) < 0.01);
    assert!(corr(&h.z_d1, &h.z_d2) < 0.01);
    assert!(corr(&h.h_sd1, &h.h_sd2) < 0.01);
}

#[test]
fn phase_one_moments() {
    let p = params(0.0);
    let h = draw_realization(&p, N, &TrialStreams::new(12, 0));
    let zeros = vec![C::new(0.0, 0.0); N];
    let (y_r, _) = phase1(&zeros, &h).unwrap();
    let noise = mean(y_r.iter().map(|y| y.norm_sqr()));
    assert!((noise - 1.0).abs() < 0.01);

    let x: Vec<C> = (0..N).map(|i| C::from_polar(p.amplitude(), i as f64)).collect();
    let signal = mean(h.h_sr.iter().zip(&x).map(|(g, x)| (g * x).norm_sqr()));
    let snr = signal / mean(h.z_r.iter().map(|z| z.norm_sqr()));
    assert!((snr / 31.62 - 1.0).abs() < 0.03, "{snr}");
}

#[test]
fn phase_two_power_adds_up() {
    let p = params(3.0);
    let h = draw_realization(&p, N, &TrialStreams::new(13, 0));
    let x: Vec<C> = (0..N).map(|i| C::from_polar(p.amplitude(), 0.3 * i as f64)).collect();
    let xr: Vec<C> = (0..N).map(|i| C::from_polar(p.amplitude(), 1.1 * i as f64)).collect();
    let y = phase2(&x, &xr, &h).unwrap();
    let want = p.es() * (p.sigma2_sd + p.sigma2_rd) + 1.0;
    let got = mean(y.iter().map(|v| v.norm_sqr()));
    assert!((got / want - 1.0).abs() < 0.03, "{got} vs {want}");
}

#[test]
fn phase_two_hooks() {
    let x = vec![C::new(0.0, 1.0); 4];
    let mut h = ChannelRealization::constant(4, C::new(0.5, 0.5));
    let zero = vec![C::new(0.0, 0.0); 4];
    let (_, y_d1) = phase1(&x, &h).unwrap();
    // silent relay: phase 2 looks like phase 1
    assert_eq!(phase2(&x, &zero, &h).unwrap(), y_d1);
    // silent source link: pure relay observation
    h.h_sd2 = zero.clone();
    let y = phase2(&x, &x, &h).unwrap();
    assert!(y.iter().zip(&x).all(|(a, b)| *a == C::new(0.5, 0.5) * b));
}

#[test]
fn transpose_index_map() {
    let (rows, depth) = (5, 7);
    let x: Vec<usize> = (0..rows * depth).collect();
    let y = interleave(&x, depth).unwrap();
    for r in 0..rows {
        for c in 0..depth {
            // element (r, c) of the row-major matrix lands at (c, r) of its transpose
            assert_eq!(y[c * rows + r], x[r * depth + c]);
        }
    }
    assert_eq!(deinterleave(&y, depth).unwrap(), x);
}

#[test]
fn block_fading_is_deterministic_and_spread() {
    let p = params(0.0).with_fading(FadingMode::Block { depth: 16 }).unwrap();
    let s = TrialStreams::new(5, 1);
    let a = draw_realization(&p, 4096, &s);
    assert_eq!(a, draw_realization(&p, 4096, &s));
    // neighbours in code order see different fades
    assert!(a.h_sd1.windows(2).all(|w| w[0] != w[1]));
}
