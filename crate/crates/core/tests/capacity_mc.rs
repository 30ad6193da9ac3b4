use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use relay_tcm::capacity::{
    cc_bounds, crossing, default_beta_grid, direct_bounds, gaussian_bounds, mi_term, Alphabets,
    McConfig, MiTerm,
};
use relay_tcm::channel::ChannelParams;

fn cfg(n_fade: usize, seed: u64) -> McConfig {
    McConfig {
        n_fade,
        n_noise: 50,
        seed,
    }
}

fn params(sd: f64, sr: f64, rd: f64, es: f64) -> ChannelParams<f64> {
    ChannelParams::from_db(sd, sr, rd, es).unwrap()
}

#[test]
fn extra_observation_never_hurts() {
    let a = Alphabets::<f64>::psk(8).unwrap();
    for es in [-5.0, 0.0, 5.0] {
        let p = params(0.0, 15.0, 15.0, es);
        let r1 = mi_term(MiTerm::R1, &a, &p, &cfg(2000, 1)).unwrap();
        let r5 = mi_term(MiTerm::R5, &a, &p, &cfg(2000, 1)).unwrap();
        assert!(r5.value >= r1.value - 2.0 * (r1.stderr + r5.stderr), "{es}");
        for r in [r1, r5] {
            assert!((0.0..=3.0).contains(&r.value));
        }
    }
}

#[test]
fn phase_one_terms_are_symmetric_in_the_link_variances() {
    let a = Alphabets::<f64>::psk(4).unwrap();
    let r1 = mi_term(MiTerm::R1, &a, &params(0.0, 7.0, 15.0, 2.0), &cfg(4000, 2)).unwrap();
    let r3 = mi_term(MiTerm::R3, &a, &params(7.0, 0.0, 15.0, 2.0), &cfg(4000, 3)).unwrap();
    let tol = 3.0 * (r1.stderr.powi(2) + r3.stderr.powi(2)).sqrt();
    assert!((r1.value - r3.value).abs() < tol, "{} vs {}", r1.value, r3.value);
}

#[test]
fn lower_bounds_sit_below_upper_bounds() {
    let a = Alphabets::<f64>::psk(8).unwrap();
    for es in [-10.0, -5.0, 0.0, 5.0, 10.0] {
        let p = params(0.0, 15.0, 15.0, es);
        let (lg, ug) = gaussian_bounds(&p, &default_beta_grid(), &cfg(2000, 4)).unwrap();
        assert!(lg.value <= ug.value + 2.0 * (lg.stderr + ug.stderr));
        let (lc, uc) = cc_bounds(&p, &a, &cfg(1000, 4)).unwrap();
        assert!(lc.value <= uc.value + 2.0 * (lc.stderr + uc.stderr));
        assert!(lc.value <= lg.value + 2.0 * (lc.stderr + lg.stderr));
        assert!(lg.beta_star.is_some() && lc.beta_star.is_none());
    }
}

fn c(x: f64) -> f64 {
    (1.0 + x).log2()
}

/// `|h|²` for `h ~ CN(0, var)`, drawn as an exponential variable.
fn power(rng: &mut ChaCha20Rng, var: f64) -> f64 {
    -var * (1.0 - rng.random::<f64>()).ln()
}

#[test]
fn zero_beta_matches_an_independent_estimate() {
    let p = params(0.0, 15.0, 15.0, -6.0);
    let (lg, _) = gaussian_bounds(&p, &[0.0], &cfg(20_000, 5)).unwrap();
    let es = p.es();
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let n = 400_000;
    let (mut relay, mut dest) = (0.0, 0.0);
    for _ in 0..n {
        let (sr, sd, sd2, rd) = (
            power(&mut rng, p.sigma2_sr),
            power(&mut rng, p.sigma2_sd),
            power(&mut rng, p.sigma2_sd),
            power(&mut rng, p.sigma2_rd),
        );
        relay += 0.5 * (c(sr * es) + c(sd * es));
        // with β = 0 the combining term is |h_sd|² + |h_rd|²
        dest += 0.5 * (c(sd2 * es) + c((sd2 + rd) * es));
    }
    let want = (relay / n as f64).min(dest / n as f64);
    assert!((lg.value - want).abs() < 4.0 * lg.stderr, "{} vs {want}", lg.value);
}

#[test]
fn stderr_shrinks_like_root_n() {
    let a = Alphabets::<f64>::psk(4).unwrap();
    let p = params(0.0, 15.0, 15.0, 0.0);
    let s1 = mi_term(MiTerm::R2, &a, &p, &cfg(2000, 6)).unwrap().stderr;
    let s2 = mi_term(MiTerm::R2, &a, &p, &cfg(8000, 6)).unwrap().stderr;
    assert!((s1 / s2 / 2.0 - 1.0).abs() < 0.15, "{s1} {s2}");
}

#[test]
fn dead_links_carry_nothing() {
    let a = Alphabets::<f64>::psk(8).unwrap();
    let p = ChannelParams::new(1e-12, 1e-12, 1e-12, 0.0).unwrap();
    let (lc, uc) = cc_bounds(&p, &a, &cfg(1000, 7)).unwrap();
    assert!(lc.value < 1e-6 && uc.value < 1e-6);
}

#[test]
fn relaying_beats_direct_transmission_at_one_bit() {
    let grid: Vec<f64> = (-12..=4).map(f64::from).collect();
    let mut relay = Vec::new();
    let mut direct = Vec::new();
    let a = Alphabets::<f64>::psk(4).unwrap();
    for &es in &grid {
        let p = params(0.0, 15.0, 15.0, es);
        let (lg, _) = gaussian_bounds(&p, &default_beta_grid(), &cfg(2000, 8)).unwrap();
        let (_, dg) = direct_bounds(&p, &a, &cfg(1000, 8)).unwrap();
        relay.push((es, lg.value));
        direct.push((es, dg.value));
    }
    let r = crossing(&relay, 1.0).unwrap();
    let d = crossing(&direct, 1.0).unwrap();
    assert!(r + 5.0 < d, "relay {r} dB, direct {d} dB");
}
