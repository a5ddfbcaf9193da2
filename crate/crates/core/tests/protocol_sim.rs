use dpa_core::gf2::BitVector;
use dpa_core::protocol::{
    binary_entropy, check_signal_equivalence, key_length, run_bb84, run_dqkd, run_integrated,
    run_relay, simulate, simulate_report, ChannelModel, EveModel, ForcedRates, Line, Mode,
    ProtocolKind, RelayScheme, Role, Sifting, SimConfig,
};
use dpa_core::quantum::{Basis, EQUIVALENCE_TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg(protocol: ProtocolKind, n: usize, seed: u64) -> SimConfig {
    let mut c = SimConfig::new(protocol, n);
    c.seed = Some(seed);
    c
}

fn within(measured: f64, expected: f64, se: f64, k: f64) -> bool {
    (measured - expected).abs() <= k * se.max(1e-12)
}

/// Standard error of a proportion `p` over `count` trials.
fn se(p: f64, count: usize) -> f64 {
    (p * (1.0 - p) / count as f64).sqrt()
}

#[test]
fn bb84_noiseless_keeps_every_bit() {
    let t = run_bb84(&cfg(ProtocolKind::Bb84, 10_000, 3)).unwrap();
    let e = t.error_estimate.as_ref().unwrap();
    assert_eq!((e.e_b, e.e_p), (0.0, 0.0));
    let l = t.key_ledger.as_ref().unwrap();
    assert_eq!(l.n_key, 10_000);
    assert!(!t.abort);
    assert_eq!(t.alice_key, t.bob_key);
    assert_eq!(t.alice_key.as_ref().unwrap().len(), 10_000);
}

#[test]
fn bb84_depolarizing_rates() {
    let mut c = cfg(ProtocolKind::Bb84, 10_000, 4);
    c.channels.forward = ChannelModel::Depolarizing(0.1);
    let t = run_bb84(&c).unwrap();
    let e = t.error_estimate.unwrap();
    let s = se(0.05, e.x.count + e.z.count);
    assert!(within(e.e_b, 0.05, s, 3.0), "e_b = {}", e.e_b);
    assert!(within(e.e_p, 0.05, s, 3.0), "e_p = {}", e.e_p);
    let l = t.key_ledger.unwrap();
    let expected = key_length(10_000, e.e_b, e.e_p).unwrap();
    assert_eq!(
        (l.n_pa, l.n_ec, l.n_key),
        (expected.n_pa, expected.n_ec, expected.n_key)
    );
    assert_eq!(
        l.n_pa,
        (10_000.0 * (1.0 - binary_entropy(e.e_p))).floor() as usize
    );
    assert_eq!(l.n_ec, (10_000.0 * binary_entropy(e.e_b)).ceil() as usize);
}

#[test]
fn bb84_intercept_resend_aborts() {
    let mut c = cfg(ProtocolKind::Bb84, 10_000, 7);
    c.eve = EveModel::intercept_resend(&[Line::Forward]);
    let t = run_bb84(&c).unwrap();
    let e = t.error_estimate.as_ref().unwrap();
    assert!(
        within(e.e_x, 0.25, se(0.25, e.x.count), 3.0),
        "e_x = {}",
        e.e_x
    );
    assert!(
        within(e.e_z, 0.25, se(0.25, e.z.count), 3.0),
        "e_z = {}",
        e.e_z
    );
    assert!(within(e.e_b, 0.25, e.se_b, 3.0));
    assert!(t.abort && t.alice_key.is_none());
    assert!(t.key_ledger.unwrap().n_key <= 0);
}

#[test]
fn bb84_sifting_keeps_half() {
    let mut c = cfg(ProtocolKind::Bb84, 10_000, 8);
    c.sifting = Sifting::Sifted;
    let t = run_bb84(&c).unwrap();
    let sent = t.signals.len();
    let kept = t
        .signals
        .iter()
        .filter(|r| r.role != Role::Discarded)
        .count();
    assert_eq!(kept, 10_000 + c.n_test());
    let fraction = kept as f64 / sent as f64;
    assert!(within(fraction, 0.5, se(0.5, sent), 3.0), "{fraction}");
}

#[test]
fn dqkd_noiseless_uses_every_code_bit() {
    let t = run_dqkd(&cfg(ProtocolKind::Dqkd, 5_000, 1)).unwrap();
    let e = t.error_estimate.as_ref().unwrap();
    assert_eq!((e.e_roundtrip, e.e_p), (Some(0.0), 0.0));
    assert_eq!(t.key_ledger.as_ref().unwrap().n_key, 5_000);
    assert_eq!(t.sift.fraction, 1.0);
    let encoded = t.signals.iter().filter(|r| r.mode == Mode::Encode).count();
    let used = t
        .signals
        .iter()
        .filter(|r| matches!(r.role, Role::Key | Role::KeyTest))
        .count();
    assert_eq!(encoded, used);
    assert_eq!(t.alice_key, t.bob_key);
    assert_eq!(t.raw_alice, t.raw_bob);
}

#[test]
fn dqkd_round_trip_error_composes() {
    for (e1, e2, seed) in [(0.05, 0.05, 11), (0.02, 0.02, 7), (0.08, 0.01, 5)] {
        let mut c = cfg(ProtocolKind::Dqkd, 10_000, seed);
        c.channels.forward = ChannelModel::Bsc(e1);
        c.channels.backward = ChannelModel::Bsc(e2);
        let t = run_dqkd(&c).unwrap();
        let e = t.error_estimate.unwrap();
        let expected = e1 * (1.0 - e2) + e2 * (1.0 - e1);
        let rt = e.roundtrip.unwrap();
        assert!(
            within(rt.rate, expected, se(expected, rt.count), 3.0),
            "{e1} {e2}: {}",
            rt.rate
        );
        assert!(rt.rate <= e1 + e2 + 3.0 * se(expected, rt.count));
        // the forward line alone sets the check-mode rates
        assert!(within(e.e_b, e1, se(e1, e.x.count + e.z.count), 3.0));
        // the raw keys differ where the round trip flipped the bit; this is a
        // second statistic on the same run, so it gets a wider band
        let raw_errors = t
            .raw_alice
            .unwrap()
            .hamming_distance(&t.raw_bob.unwrap())
            .unwrap();
        let raw_rate = raw_errors as f64 / 10_000.0;
        assert!(
            within(raw_rate, expected, se(expected, 10_000), 4.0),
            "{e1} {e2}: raw {raw_rate}"
        );
    }
}

#[test]
fn dqkd_forced_rates_follow_the_ledger() {
    let mut c = cfg(ProtocolKind::Dqkd, 1000, 2);
    c.forced_rates = ForcedRates {
        e_roundtrip: Some(0.05),
        e_p: Some(0.05),
    };
    let t = run_dqkd(&c).unwrap();
    let l = t.key_ledger.unwrap();
    let h = binary_entropy(0.05);
    assert_eq!(l.n_pa, (1000.0 * (1.0 - h)).floor() as usize);
    assert_eq!(l.n_ec, (1000.0 * h).ceil() as usize);
    assert_eq!(l.n_key, 426);
    assert_eq!(t.alice_key.unwrap().len(), l.n_pa);
}

#[test]
fn dqkd_and_integrated_2d_share_the_ledger() {
    let forced = ForcedRates {
        e_roundtrip: Some(0.03),
        e_p: Some(0.04),
    };
    let mut ledgers = Vec::new();
    for p in [ProtocolKind::Dqkd, ProtocolKind::Integrated2d] {
        let mut c = cfg(p, 2000, 9);
        c.forced_rates = forced;
        c.channels.forward = ChannelModel::Bsc(0.01);
        let l = simulate(&c).unwrap().key_ledger.unwrap();
        ledgers.push((l.n_pa, l.n_ec, l.n_key, l.abort));
    }
    assert_eq!(ledgers[0], ledgers[1]);
}

#[test]
fn integrated_variants_deliver_the_same_length() {
    let mut lengths = Vec::new();
    for p in [
        ProtocolKind::Integrated2,
        ProtocolKind::Integrated2b,
        ProtocolKind::Integrated2c,
        ProtocolKind::Integrated2d,
    ] {
        let t = run_integrated(&cfg(p, 2048, 21)).unwrap();
        assert!(!t.abort, "{p}");
        let d = t.delayed.as_ref().unwrap();
        assert!(d.bob_matches_before_ec && d.bob_recovered, "{p}");
        assert_eq!(d.pattern_weight, 0);
        if matches!(p, ProtocolKind::Integrated2b | ProtocolKind::Integrated2c) {
            assert_eq!(d.recovered_via_key, Some(true));
            assert_eq!(d.recovered_via_rawkey, Some(true));
        }
        assert_eq!(t.alice_key, t.bob_key);
        lengths.push(t.alice_key.unwrap().len());
        assert_eq!(d.n_pa, t.key_ledger.unwrap().n_pa);
    }
    assert!(lengths.iter().all(|&l| l == 2048), "{lengths:?}");
}

#[test]
fn integrated_2d_in_z_carries_m1() {
    let mut c = cfg(ProtocolKind::Integrated2d, 512, 5);
    c.forced_basis = Some(Basis::Z);
    let t = run_integrated(&c).unwrap();
    let key_records: Vec<_> = t.signals.iter().filter(|r| r.role == Role::Key).collect();
    let m1 = BitVector::from_bits(key_records.iter().map(|r| r.m1.unwrap()));
    let bob = BitVector::from_bits(
        key_records
            .iter()
            .map(|r| r.bob_outcome.unwrap() ^ r.bob_bit),
    );
    assert_eq!(bob, m1);
    // with n_pa = n the PA matrix is invertible; m' = f(m1)
    assert!(t.delayed.unwrap().bob_matches_before_ec);
}

#[test]
fn integrated_2c_2d_signal_states_satisfy_the_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for (p, fwd, eve) in [
        (
            ProtocolKind::Integrated2d,
            ChannelModel::Noiseless,
            EveModel::none(),
        ),
        (
            ProtocolKind::Integrated2d,
            ChannelModel::Depolarizing(0.2),
            EveModel::none(),
        ),
        (
            ProtocolKind::Integrated2d,
            ChannelModel::Bsc(0.05),
            EveModel::intercept_resend(&[Line::Forward]),
        ),
        (
            ProtocolKind::Integrated2c,
            ChannelModel::Noiseless,
            EveModel::none(),
        ),
        (
            ProtocolKind::Integrated2c,
            ChannelModel::Bsc(0.05),
            EveModel::intercept_resend(&[Line::Forward]),
        ),
    ] {
        let mut c = cfg(p, 256, 13);
        c.channels.forward = fwd;
        c.eve = eve;
        let t = run_integrated(&c).unwrap();
        let eq = check_signal_equivalence(&t, &fwd, 20, &mut rng).unwrap();
        assert_eq!(eq.signals.len(), 20);
        assert!(eq.max() <= EQUIVALENCE_TOL, "{}", eq.max());
    }
}

#[test]
fn integrated_noisy_backward_is_corrected() {
    for p in [
        ProtocolKind::Integrated2b,
        ProtocolKind::Integrated2c,
        ProtocolKind::Integrated2d,
    ] {
        let mut c = cfg(p, 4000, 17);
        c.channels.forward = ChannelModel::Bsc(0.02);
        c.channels.backward = ChannelModel::Bsc(0.03);
        let t = run_integrated(&c).unwrap();
        let e = t.error_estimate.as_ref().unwrap();
        let expected = 0.02 * 0.97 + 0.03 * 0.98;
        assert!(
            within(e.e_roundtrip.unwrap(), expected, se(expected, 4000), 3.0),
            "{p}"
        );
        assert!(!t.abort);
        assert_eq!(t.alice_key, t.bob_key);
        assert!(!t.delayed.unwrap().bob_matches_before_ec);
    }
}

#[test]
fn relay_keys_and_pool_accounting() {
    let t = run_relay(&cfg(ProtocolKind::Relay, 1024, 1)).unwrap();
    let r = t.relay.unwrap();
    assert!(r.keys_match);
    assert_eq!(r.bob_key_digest, r.charlie_key_digest);
    assert_eq!(r.n_pa, 1024);
    assert_eq!(r.pool_consumed, 1024);

    let mut c = cfg(ProtocolKind::Relay, 2000, 2);
    c.channels.forward = ChannelModel::Bsc(0.03);
    let delayed = run_relay(&c).unwrap();
    c.relay_scheme = RelayScheme::Normal;
    let normal = run_relay(&c).unwrap();
    let (d, nr) = (delayed.relay.unwrap(), normal.relay.unwrap());
    assert!(d.keys_match && nr.keys_match);
    assert_eq!(d.pool_consumed, 2000);
    assert_eq!(nr.pool_consumed, nr.n_pa);
    assert!(nr.n_pa < 2000);
    let l = delayed.key_ledger.unwrap();
    assert_eq!(delayed.alice_key.unwrap().len(), l.n_pa);
    assert_eq!(l.pool_consumed, Some(2000));
}

#[test]
fn relay_pool_must_cover_the_raw_key() {
    let mut c = cfg(ProtocolKind::Relay, 100, 1);
    c.pool = Some(99);
    assert!(run_relay(&c).is_err());
}

#[test]
fn identical_seeds_give_identical_runs() {
    for p in ProtocolKind::ALL {
        let mut c = cfg(p, 600, 77);
        c.channels.forward = ChannelModel::Depolarizing(0.04);
        if p != ProtocolKind::Integrated2 {
            c.channels.backward = ChannelModel::Bsc(0.01);
        }
        let (r1, t1) = simulate_report(&c).unwrap();
        let (r2, t2) = simulate_report(&c).unwrap();
        assert_eq!(t1, t2, "{p}");
        assert_eq!(r1.deterministic_json(), r2.deterministic_json(), "{p}");
        c.seed = Some(78);
        assert_ne!(simulate(&c).unwrap().signals, t1.signals, "{p}");
    }
}

#[test]
fn missing_test_basis_aborts() {
    let mut c = cfg(ProtocolKind::Dqkd, 200, 3);
    c.check_fraction = 1.0;
    let t = run_dqkd(&c).unwrap();
    assert!(t.abort);
    assert!(t.abort_reason.unwrap().contains("x-basis"));
    c.check_fraction = 0.5;
    c.min_check_per_basis = 1000;
    assert!(run_dqkd(&c).unwrap().abort);
}
