use relay_tcm::constellation::LabellingScheme;
use relay_tcm_harness::config::ChannelConfig;
use relay_tcm_harness::output::write_csv;
use relay_tcm_harness::{
    compare_ideal_vs_nonideal, run_ber_sweep, run_uncoded_sweep, DecoderKind, SweepConfig,
};

fn cfg(code: &str, es_db: Vec<f64>, max_trials: u64) -> SweepConfig {
    SweepConfig {
        code: code.into(),
        m: None,
        labelling: None,
        decoder: DecoderKind::NearMl,
        channel: ChannelConfig::new(0.0, 15.0, 15.0),
        es_db,
        max_trials,
        max_bit_errors: 100,
        payload_bits: 96,
        seed: 11,
        output: None,
        noiseless: false,
    }
}

fn csv_bytes(rows: &[impl serde::Serialize]) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_csv(&path, rows).unwrap();
    std::fs::read(path).unwrap()
}

fn with_threads<R: Send>(n: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

#[test]
fn csv_is_identical_across_thread_counts() {
    let c = cfg("four_state_8psk", vec![0.0, 3.0], 300);
    let one = with_threads(1, || run_ber_sweep(&c).unwrap());
    let four = with_threads(4, || run_ber_sweep(&c).unwrap());
    assert_eq!(csv_bytes(&one), csv_bytes(&four));
    let p1 = with_threads(1, || compare_ideal_vs_nonideal(&c).unwrap());
    let p3 = with_threads(3, || compare_ideal_vs_nonideal(&c).unwrap());
    assert_eq!(csv_bytes(&p1), csv_bytes(&p3));
}

#[test]
fn seed_changes_the_draws() {
    let mut c = cfg("two_state_8psk", vec![0.0], 200);
    c.max_bit_errors = 1_000_000;
    let a = run_ber_sweep(&c).unwrap();
    c.seed += 1;
    let b = run_ber_sweep(&c).unwrap();
    assert_ne!(a[0].errors, b[0].errors);
}

#[test]
fn noiseless_frames_decode_perfectly() {
    for code in [
        "example1_4psk",
        "two_state_8psk",
        "four_state_8psk",
        "eight_state_8psk",
        "sixteen_state_8psk",
        "eight_state_16psk",
    ] {
        let mut c = cfg(code, vec![-10.0, 0.0], 20);
        c.noiseless = true;
        for decoder in [DecoderKind::NearMl, DecoderKind::IdealMl] {
            c.decoder = decoder;
            for r in run_ber_sweep(&c).unwrap() {
                assert_eq!(r.errors, 0, "{code} {decoder:?}");
                assert_eq!(r.bits, 20 * 96);
            }
        }
    }
}

#[test]
fn very_high_snr_is_error_free() {
    let mut c = cfg("four_state_8psk", vec![60.0], 16_000);
    c.max_bit_errors = 1;
    let r = &run_ber_sweep(&c).unwrap()[0];
    assert!(r.bits >= 1_000_000);
    assert_eq!(r.errors, 0);
}

#[test]
fn perfect_relay_link_closes_the_gap() {
    let mut c = cfg("four_state_8psk", vec![0.0, 4.0], 400);
    c.channel.sigma2_sr_db = 200.0;
    for p in compare_ideal_vs_nonideal(&c).unwrap() {
        // Same frames, the relay never errs, so only the metrics differ.
        let diff = p.errors_near_ml.abs_diff(p.errors_ideal_ml) as f64;
        assert!(diff <= 0.1 * p.errors_ideal_ml.max(10) as f64, "{p:?}");
    }
}

#[test]
fn stopping_rule_holds_per_record() {
    let mut c = cfg("uncoded", vec![0.0, 10.0, 30.0], 2000);
    c.m = Some(8);
    c.labelling = Some(LabellingScheme::Bar);
    for r in run_uncoded_sweep(&c).unwrap() {
        assert!(r.errors >= 100 || r.bits == 2000 * 96);
        if r.errors >= 100 {
            assert!(r.stderr / r.ber < 0.2);
        }
        assert_eq!(r.ber, r.errors as f64 / r.bits as f64);
    }
}

#[test]
fn four_psk_labellings_coincide() {
    // For M = 4 the bar map only swaps the two antipodal pairs' roles, so
    // both schemes see the same distance structure.
    let mut c = cfg("uncoded", vec![8.0, 12.0], 20_000);
    c.m = Some(4);
    c.max_bit_errors = 300;
    let constant = run_uncoded_sweep(&c).unwrap();
    c.labelling = Some(LabellingScheme::Bar);
    let bar = run_uncoded_sweep(&c).unwrap();
    for (a, b) in constant.iter().zip(&bar) {
        let z = (a.ber - b.ber).abs() / (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!(z < 4.0, "{a:?} {b:?}");
    }
}
