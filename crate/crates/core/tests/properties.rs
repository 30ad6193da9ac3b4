use num_complex::Complex64 as C;
use proptest::prelude::*;
use relay_tcm::channel::{deinterleave, draw_realization, interleave, phase1, ChannelParams};
use relay_tcm::codemetrics::min_diversity_pairs;
use relay_tcm::constellation::{bar_labelling, make_psk, Labelling};
use relay_tcm::decoder::{relay_decode, relay_path_metric};
use relay_tcm::pepbounds::{embed_pair, mc_pep, pep_full};
use relay_tcm::rng::TrialStreams;
use relay_tcm::trellis::{catalog, catalog_names, default_horizon, encode_path, path_bits, Which};

fn code_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(catalog_names().collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bar_labelling_is_an_involutive_bijection(exp in 2u32..8) {
        let m = 1usize << exp;
        let bar = bar_labelling(m);
        prop_assert!(bar.is_bijection());
        prop_assert_eq!(bar.compose(&bar).map, (0..m).collect::<Vec<_>>());
        prop_assert!(make_psk::<f64>(m).is_ok());
    }

    #[test]
    fn permutations_are_accepted_and_others_rejected(perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(), i in 0usize..8, j in 0usize..8) {
        prop_assert!(Labelling::new("p", perm.clone()).is_ok());
        let mut broken = perm;
        broken[i] = broken[j];
        prop_assert_eq!(Labelling::new("q", broken).is_ok(), i == j);
    }

    #[test]
    fn interleaver_round_trip(rows in 1usize..20, depth in 1usize..20, seed in any::<u64>()) {
        let x: Vec<u64> = (0..rows * depth).map(|k| seed.wrapping_mul(k as u64 + 1)).collect();
        let y = interleave(&x, depth).unwrap();
        prop_assert_eq!(deinterleave(&y, depth).unwrap(), x.clone());
        let mut sorted = y;
        sorted.sort_unstable();
        let mut orig = x;
        orig.sort_unstable();
        prop_assert_eq!(sorted, orig);
    }

    #[test]
    fn encoding_round_trips_payload_bits(name in code_name(), bits in prop::collection::vec(0u8..2, 0..12)) {
        let lt = catalog::<f64>(name).unwrap();
        let t = lt.trellis();
        let bpb = t.bits_per_branch();
        let bits = &bits[..bits.len() / bpb * bpb];
        let path = encode_path(t, bits).unwrap();
        prop_assert!(path.is_terminated(t));
        prop_assert_eq!(path_bits(t, &path, bits.len() / bpb), bits.to_vec());
    }

    #[test]
    fn relay_decision_never_loses_to_the_sent_path(name in code_name(), seed in any::<u64>(), es in -5.0f64..20.0) {
        let lt = catalog::<f64>(name).unwrap();
        let t = lt.trellis();
        let bits: Vec<u8> = (0..8 * t.bits_per_branch()).map(|k| ((seed >> (k % 64)) & 1) as u8).collect();
        let path = encode_path(t, &bits).unwrap();
        let p = ChannelParams::from_db(0.0, 15.0, 15.0, es).unwrap();
        let h = draw_realization(&p, path.len(), &TrialStreams::new(seed, 0));
        let x = p.scale(&lt.symbols(&path, Which::S1));
        let (y_r, _) = phase1(&x, &h).unwrap();
        let got = relay_decode(&lt, p.amplitude(), &y_r, &h.h_sr).unwrap();
        let sent = relay_path_metric(&lt, p.amplitude(), &y_r, &h.h_sr, &path);
        prop_assert!(got.metric <= sent + 1e-9);
        // survivor metrics grow along the decoded path
        let mut acc = 0.0;
        for (i, &e) in got.path.edges.iter().enumerate() {
            let step = (y_r[i] - h.h_sr[i] * lt.symbol(e, Which::S1) * p.amplitude()).norm_sqr();
            prop_assert!(step >= 0.0);
            acc += step;
        }
        prop_assert!((acc - got.metric).abs() < 1e-9 * (1.0 + acc));
    }

    #[test]
    fn full_bound_is_monotone(pair in 0usize..96, es in -5.0f64..25.0, bump in 0.1f64..5.0, knob in 0usize..4) {
        let lt = catalog::<f64>("four_state_8psk").unwrap();
        let pairs = min_diversity_pairs(&lt, default_horizon(lt.trellis())).unwrap();
        let (a, b) = embed_pair(lt.trellis(), &pairs.pairs[pair % pairs.pairs.len()]).unwrap();
        let mut db = [0.0, 15.0, 15.0, es];
        let base = ChannelParams::from_db(db[0], db[1], db[2], db[3]).unwrap();
        db[knob] += bump;
        let up = ChannelParams::from_db(db[0], db[1], db[2], db[3]).unwrap();
        let f = |p| pep_full(&lt, &a, &b, p).unwrap().all_pairs;
        prop_assert!(f(&up) < f(&base));
    }
}

#[test]
fn monte_carlo_is_independent_of_thread_count() {
    let lt = catalog::<f64>("four_state_8psk").unwrap();
    let pairs = min_diversity_pairs(&lt, default_horizon(lt.trellis())).unwrap();
    let (a, b) = embed_pair(lt.trellis(), &pairs.pairs[0]).unwrap();
    let p = ChannelParams::from_db(0.0, 15.0, 15.0, 0.0).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_pep(&lt, &a, &b, &p, 20_000, 9).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn zero_energy_observations_are_pure_noise() {
    let p = ChannelParams::from_db(0.0, 15.0, 15.0, 0.0).unwrap();
    let h = draw_realization(&p, 8, &TrialStreams::new(1, 2));
    let (y_r, _) = phase1(&[C::new(0.0, 0.0); 8], &h).unwrap();
    assert_eq!(y_r, h.z_r);
}
