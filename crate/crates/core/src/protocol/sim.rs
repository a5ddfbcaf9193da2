//! Seeded Monte-Carlo runs of the forward-line BB84, the two-way DQKD
//! protocol, the integrated Protocol 1 + 2/2b/2c/2d chain and the trusted relay.

use std::sync::Arc;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::channel::{Interception, Line, Qubit};
use super::config::{PaChoice, ProtocolKind, RelayScheme, Sifting, SimConfig};
use super::estimate::{estimate_errors, ErrorEstimate, Tally, TestBit};
use super::keyrate::{binary_entropy, clamp_rate, key_length, KeyLedger};
use super::table1::decode_key_bit;
use super::transcript::{
    key_digest, DelayedOutcome, Mode, ProtocolTranscript, RelayOutcome, Report, Role, SiftStats,
    SignalRecord,
};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::pa::{AdditivePaFunction, PreparedMessage};
use crate::quantum::{Basis, Pauli};

/// Independent ChaCha streams per role, so that changing one party's
/// behaviour does not shift another party's randomness.
pub mod stream {
    pub const BOB: u64 = 1;
    pub const FORWARD: u64 = 2;
    pub const ALICE: u64 = 3;
    pub const MESSAGE: u64 = 4;
    pub const BACKWARD: u64 = 5;
    pub const PA: u64 = 6;
    pub const SAMPLING: u64 = 7;
    /// Signal selection for the per-signal density-matrix check.
    pub const EQUIVALENCE: u64 = 8;
}

pub fn stream_rng(seed: u64, role: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(role);
    rng
}

/// A fresh seed from the operating system.
pub fn fresh_seed() -> u64 {
    rand::rng().random()
}

/// Which of the two Alice integrated variants carries the message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Classical OTP of `f(m)` with the final key.
    Otp,
    /// Classical `a ⊕ m`, PA delayed.
    Delayed,
    /// `a ⊕ m` as `w` eigenstates, Alice measured `A`.
    Quantum,
    /// `X^{m1} Z^{m2}` on the unmeasured qubit.
    Depolarizing,
}

impl Variant {
    fn of(kind: ProtocolKind) -> Option<Self> {
        match kind {
            ProtocolKind::Integrated2 => Some(Variant::Otp),
            ProtocolKind::Integrated2b => Some(Variant::Delayed),
            ProtocolKind::Integrated2c => Some(Variant::Quantum),
            ProtocolKind::Integrated2d => Some(Variant::Depolarizing),
            _ => None,
        }
    }
}

struct Run<'a> {
    cfg: &'a SimConfig,
    seed: u64,
    bob: ChaCha8Rng,
    forward: ChaCha8Rng,
    alice: ChaCha8Rng,
    message: ChaCha8Rng,
    backward: ChaCha8Rng,
    sampling: ChaCha8Rng,
    signals: Vec<SignalRecord>,
}

fn random_basis<R: Rng + ?Sized>(rng: &mut R, p_z: f64) -> Basis {
    if rng.random_bool(p_z) {
        Basis::Z
    } else {
        Basis::X
    }
}

impl<'a> Run<'a> {
    fn new(cfg: &'a SimConfig) -> Self {
        let seed = cfg.seed.unwrap_or_else(fresh_seed);
        Self {
            cfg,
            seed,
            bob: stream_rng(seed, stream::BOB),
            forward: stream_rng(seed, stream::FORWARD),
            alice: stream_rng(seed, stream::ALICE),
            message: stream_rng(seed, stream::MESSAGE),
            backward: stream_rng(seed, stream::BACKWARD),
            sampling: stream_rng(seed, stream::SAMPLING),
            signals: Vec::new(),
        }
    }

    /// Bob prepares a signal; Eve and the forward channel act on it. Returns
    /// the record (without Alice's part) and the qubit as Alice receives it.
    /// A configured forced basis applies only to signals that may carry key
    /// (`keyed`), so that test signals still cover both bases.
    fn send_forward(&mut self, keyed: bool) -> (SignalRecord, Qubit) {
        let random = random_basis(&mut self.bob, 0.5);
        let bob_basis = match self.cfg.forced_basis {
            Some(b) if keyed => b,
            _ => random,
        };
        let bob_bit: bool = self.bob.random();
        let mut q = Qubit::prepare(bob_basis, bob_bit);
        let eve_forward = self
            .cfg
            .eve
            .intercept(Line::Forward, &mut q, &mut self.forward);
        let forward_noise = self.cfg.channels.forward.sample(&mut self.forward);
        q.apply(forward_noise);
        let record = SignalRecord {
            index: self.signals.len(),
            bob_basis,
            bob_bit,
            mode: Mode::Memory,
            alice_basis: None,
            alice_outcome: None,
            alice_op: None,
            m1: None,
            m2: None,
            bob_outcome: None,
            forward_noise,
            backward_noise: None,
            eve_forward,
            eve_backward: None,
            role: Role::Key,
        };
        (record, q)
    }

    /// Eve and the backward channel act on a returned qubit, which Bob then
    /// measures in `basis`.
    fn send_backward(&mut self, mut q: Qubit, basis: Basis) -> (bool, Pauli, Option<Interception>) {
        let eve = self
            .cfg
            .eve
            .intercept(Line::Backward, &mut q, &mut self.backward);
        let noise = self.cfg.channels.backward.sample(&mut self.backward);
        q.apply(noise);
        (q.measure(basis, &mut self.backward), noise, eve)
    }

    /// Classical bit over the backward line: flipped with the channel's
    /// induced error rate. Reading a classical bit disturbs nothing, so Eve
    /// does not act here.
    fn send_classical(&mut self, bit: bool) -> (bool, Pauli) {
        let noise = self.cfg.channels.backward.sample(&mut self.backward);
        (bit ^ noise.flips(Basis::Z), noise)
    }

    /// `k` distinct positions among `0..len`, in increasing order.
    fn sample_positions(&mut self, len: usize, k: usize) -> Result<Vec<usize>> {
        if k > len {
            return Err(Error::Config(format!("cannot disclose {k} of {len} bits")));
        }
        let mut v = index::sample(&mut self.sampling, len, k).into_vec();
        v.sort_unstable();
        Ok(v)
    }

    fn mask(&mut self, len: usize, k: usize) -> Result<Vec<bool>> {
        let mut m = vec![false; len];
        for i in self.sample_positions(len, k)? {
            m[i] = true;
        }
        Ok(m)
    }

    fn transcript(self, sift: SiftStats) -> ProtocolTranscript {
        ProtocolTranscript {
            protocol: self.cfg.protocol,
            seed: self.seed,
            signals: self.signals,
            error_estimate: None,
            key_ledger: None,
            abort: false,
            abort_reason: None,
            sift,
            raw_alice: None,
            raw_bob: None,
            alice_key: None,
            bob_key: None,
            pa_seed: None,
            delayed: None,
            relay: None,
        }
    }

    /// Forward-line BB84. Returns the run, the test bits and the kept
    /// (raw-key) signal indices; `measure_key` false leaves code qubits
    /// unmeasured and returns them.
    fn protocol1(&mut self, measure_key: bool) -> Result<Protocol1> {
        let n = self.cfg.n;
        let n_test = self.cfg.n_test();
        let total = n + n_test;
        let mut kept: Vec<(usize, Option<Qubit>)> = Vec::with_capacity(total);
        match self.cfg.sifting {
            Sifting::Memory => {
                let test = self.mask(total, n_test)?;
                for &is_test in &test {
                    let (mut r, mut q) = self.send_forward(!is_test);
                    if is_test || measure_key {
                        let outcome = q.measure(r.bob_basis, &mut self.alice);
                        r.alice_basis = Some(r.bob_basis);
                        r.alice_outcome = Some(outcome);
                    } else {
                        r.mode = Mode::Encode;
                    }
                    r.role = if is_test { Role::Test } else { Role::Key };
                    kept.push((r.index, (!is_test && !measure_key).then_some(q)));
                    self.signals.push(r);
                }
            }
            Sifting::Sifted => {
                while kept.len() < total {
                    let (mut r, mut q) = self.send_forward(true);
                    let basis = random_basis(&mut self.alice, 0.5);
                    let outcome = q.measure(basis, &mut self.alice);
                    r.mode = Mode::Check;
                    r.alice_basis = Some(basis);
                    r.alice_outcome = Some(outcome);
                    if basis == r.bob_basis {
                        kept.push((r.index, None));
                    } else {
                        r.role = Role::Discarded;
                    }
                    self.signals.push(r);
                }
                for i in self.sample_positions(total, n_test)? {
                    self.signals[kept[i].0].role = Role::Test;
                }
            }
        }
        let tests: Vec<TestBit> = self
            .signals
            .iter()
            .filter(|r| r.role == Role::Test)
            .map(|r| TestBit {
                basis: r.bob_basis,
                sent: r.bob_bit,
                received: r.alice_outcome.expect("test signals are measured"),
            })
            .collect();
        let key: Vec<(usize, Option<Qubit>)> = kept
            .into_iter()
            .filter(|(i, _)| self.signals[*i].role == Role::Key)
            .collect();
        let sift = SiftStats::new(self.signals.len(), self.signals.len(), total);
        Ok(Protocol1 { tests, key, sift })
    }

    fn raw_keys(&self, key: &[(usize, Option<Qubit>)]) -> (BitVector, BitVector) {
        let a = BitVector::from_bits(
            key.iter()
                .map(|(i, _)| self.signals[*i].alice_outcome.unwrap_or(false)),
        );
        let b = BitVector::from_bits(key.iter().map(|(i, _)| self.signals[*i].bob_bit));
        (a, b)
    }
}

fn pa_function(
    cfg: &SimConfig,
    seed: u64,
    n_pa: usize,
    n: usize,
    reduce: bool,
) -> Result<AdditivePaFunction> {
    let mut rng = match cfg.pa {
        PaChoice::Auto => stream_rng(seed, stream::PA),
        PaChoice::Seed(s) => ChaCha8Rng::seed_from_u64(s),
    };
    AdditivePaFunction::random_toeplitz_with(n_pa, n, &mut rng, reduce)
}

struct Protocol1 {
    tests: Vec<TestBit>,
    key: Vec<(usize, Option<Qubit>)>,
    sift: SiftStats,
}

fn abort(mut t: ProtocolTranscript, reason: impl Into<String>) -> ProtocolTranscript {
    t.abort = true;
    t.abort_reason = Some(reason.into());
    t
}

fn ledger_abort_reason(l: &KeyLedger) -> String {
    format!(
        "no net key: N_PA = {} does not exceed N_EC = {} (N_key = {})",
        l.n_pa, l.n_ec, l.n_key
    )
}

/// Ledger from measured rates, overridden by any forced rates.
fn ledger(cfg: &SimConfig, n_test: usize, e_ec: f64, est: &ErrorEstimate) -> Result<KeyLedger> {
    let e_ec = cfg.forced_rates.e_roundtrip.unwrap_or(clamp_rate(e_ec));
    let e_p = cfg.forced_rates.e_p.unwrap_or(clamp_rate(est.e_p));
    let mut l = key_length(cfg.n, e_ec, e_p)?;
    l.n_test = n_test;
    l.h_b = Some(binary_entropy(clamp_rate(est.e_b)));
    Ok(l)
}

fn estimate_or_abort(
    tests: &[TestBit],
    cfg: &SimConfig,
) -> std::result::Result<ErrorEstimate, String> {
    estimate_errors(tests, cfg.min_check_per_basis)
        .map_err(|e| format!("channel estimation impossible: {e}"))
}

/// Protocol 1: BB84 on the forward line, ideal error correction charged at
/// `e_b`, PA with a fresh Toeplitz matrix.
pub fn run_bb84(cfg: &SimConfig) -> Result<ProtocolTranscript> {
    cfg.validate()?;
    let mut run = Run::new(cfg);
    let p1 = run.protocol1(true)?;
    let (a, b) = run.raw_keys(&p1.key);
    let mut t = run.transcript(p1.sift);
    t.raw_alice = Some(a.clone());
    t.raw_bob = Some(b);
    let est = match estimate_or_abort(&p1.tests, cfg) {
        Ok(e) => e,
        Err(reason) => return Ok(abort(t, reason)),
    };
    let l = ledger(cfg, cfg.n_test(), est.e_b, &est)?;
    t.error_estimate = Some(est);
    t.key_ledger = Some(l.clone());
    if l.abort {
        return Ok(abort(t, ledger_abort_reason(&l)));
    }
    let f = pa_function(cfg, t.seed, l.n_pa, cfg.n, false)?;
    t.pa_seed = f.toeplitz_seed().cloned();
    // ideal EC: Bob's raw key is corrected to Alice's
    let corrected = a.clone();
    t.alice_key = Some(f.apply(&a)?);
    t.bob_key = Some(f.apply(&corrected)?);
    Ok(t)
}

/// Protocol DQKD: check/encode modes, Table I decoding without sifting,
/// round-trip error test and delayed-capable PA.
pub fn run_dqkd(cfg: &SimConfig) -> Result<ProtocolTranscript> {
    cfg.validate()?;
    let mut run = Run::new(cfg);
    let (n, n_test, n_key_test) = (cfg.n, cfg.n_test(), cfg.n_key_test());
    let total = n + n_test + n_key_test;
    let check = run.mask(total, n_test)?;
    let mut tests = Vec::new();
    let mut encoded: Vec<(usize, bool, bool)> = Vec::with_capacity(n + n_key_test);
    for &is_check in &check {
        let (mut r, mut q) = run.send_forward(!is_check);
        if is_check {
            let basis = random_basis(&mut run.alice, cfg.check_fraction);
            let outcome = q.measure(basis, &mut run.alice);
            r.mode = Mode::Check;
            r.alice_basis = Some(basis);
            r.alice_outcome = Some(outcome);
            if basis == r.bob_basis {
                r.role = Role::Test;
                tests.push(TestBit {
                    basis,
                    sent: r.bob_bit,
                    received: outcome,
                });
            } else {
                r.role = Role::Discarded;
            }
        } else {
            let op = Pauli::ALL[run.message.random_range(0..4)];
            q.apply(op);
            let (outcome, noise, eve) = run.send_backward(q, r.bob_basis);
            r.mode = Mode::Encode;
            r.alice_op = Some(op);
            r.bob_outcome = Some(outcome);
            r.backward_noise = Some(noise);
            r.eve_backward = eve;
            encoded.push((
                r.index,
                decode_key_bit(r.bob_basis, op),
                outcome ^ r.bob_bit,
            ));
        }
        run.signals.push(r);
    }
    let key_test = run.mask(encoded.len(), n_key_test)?;
    let mut pairs = Vec::with_capacity(n_key_test);
    let (mut a, mut b) = (BitVector::zeros(0), BitVector::zeros(0));
    for (&(i, alice, bob), &disclosed) in encoded.iter().zip(&key_test) {
        if disclosed {
            run.signals[i].role = Role::KeyTest;
            pairs.push((alice, bob));
        } else {
            a.push(alice);
            b.push(bob);
        }
    }
    // every encode-mode signal becomes a raw-key or key-test bit
    let sift = SiftStats::new(total, encoded.len(), encoded.len());
    let mut t = run.transcript(sift);
    t.raw_alice = Some(a.clone());
    t.raw_bob = Some(b);
    let est = match estimate_or_abort(&tests, cfg) {
        Ok(e) => e.with_roundtrip(Tally::from_pairs(pairs)),
        Err(reason) => return Ok(abort(t, reason)),
    };
    let l = ledger(cfg, n_test, est.e_roundtrip.unwrap_or(0.0), &est)?;
    t.error_estimate = Some(est);
    t.key_ledger = Some(l.clone());
    if l.abort {
        return Ok(abort(t, ledger_abort_reason(&l)));
    }
    let f = pa_function(cfg, t.seed, l.n_pa, n, false)?;
    t.pa_seed = f.toeplitz_seed().cloned();
    let corrected = a.clone();
    t.alice_key = Some(f.apply(&a)?);
    t.bob_key = Some(f.apply(&corrected)?);
    Ok(t)
}

/// Protocol 1 on the forward line followed by one of the backward variants.
/// Alice's secret is `m' = f(m)`; error correction is settled once, on the
/// combined pattern Bob sees in his copy of `m`.
pub fn run_integrated(cfg: &SimConfig) -> Result<ProtocolTranscript> {
    cfg.validate()?;
    let variant = Variant::of(cfg.protocol)
        .ok_or_else(|| Error::Config(format!("{} is not an integrated variant", cfg.protocol)))?;
    let n = cfg.n;
    let mut run = Run::new(cfg);
    let p1 = run.protocol1(variant != Variant::Depolarizing)?;
    let est = match estimate_or_abort(&p1.tests, cfg) {
        Ok(e) => e,
        Err(reason) => return Ok(abort(run.transcript(p1.sift), reason)),
    };
    let e_p = cfg.forced_rates.e_p.unwrap_or(clamp_rate(est.e_p));
    let n_pa = key_length(n, 0.0, e_p)?.n_pa;
    if n_pa == 0 {
        let mut t = run.transcript(p1.sift);
        let l = ledger(cfg, cfg.n_test(), est.e_b, &est)?;
        t.error_estimate = Some(est);
        t.key_ledger = Some(l.clone());
        return Ok(abort(t, ledger_abort_reason(&l)));
    }
    let reduce = matches!(variant, Variant::Delayed | Variant::Quantum);
    let f = Arc::new(pa_function(cfg, run.seed, n_pa, n, reduce)?);
    let (a, b) = run.raw_keys(&p1.key);

    let mut recovered_via_key = None;
    let mut recovered_via_rawkey = None;
    let (m, m_prime, bob_m) = match variant {
        Variant::Otp => {
            let m_prime = BitVector::random(n_pa, &mut run.message);
            let k = f.apply(&a)?;
            let c = m_prime.xor(&k)?;
            // Bob's view of f(m) under his uncorrected key; the pattern he
            // must correct is a ⊕ b
            let bob_m_prime = c.xor(&f.apply(&b)?)?;
            let bob_matches = bob_m_prime == m_prime;
            let pattern = a.hamming_distance(&b)?;
            let delayed = DelayedOutcome {
                n_pa,
                m_prime_digest: key_digest(&m_prime),
                recovered_via_key: None,
                recovered_via_rawkey: None,
                bob_matches_before_ec: bob_matches,
                bob_recovered: c.xor(&k)? == m_prime,
                pattern_weight: pattern,
            };
            let e_ec = pattern as f64 / n as f64;
            let est = est.with_roundtrip(Tally::new(n, pattern));
            let t = with_raw_keys(run.transcript(p1.sift), a, b, &f);
            let bob_secret = c.xor(&k)?;
            return finish_integrated(t, cfg, est, e_ec, m_prime, bob_secret, delayed);
        }
        Variant::Delayed | Variant::Quantum => {
            let m_prime = BitVector::random(n_pa, &mut run.message);
            let selector: u64 = run.message.random();
            let session = PreparedMessage::new(Arc::clone(&f), m_prime.clone(), selector)?
                .encrypt(a.clone())?;
            let k = session.final_key()?;
            recovered_via_key = Some(session.recover_via_key(&k)? == m_prime);
            recovered_via_rawkey = Some(session.recover_via_rawkey(&a)? == m_prime);
            let mut received = BitVector::zeros(0);
            for (j, (i, _)) in p1.key.iter().enumerate() {
                let bit = session.ciphertext().get(j);
                let basis = run.signals[*i].bob_basis;
                let (got, noise, eve) = if variant == Variant::Delayed {
                    let (got, noise) = run.send_classical(bit);
                    (got, noise, None)
                } else {
                    run.send_backward(Qubit::prepare(basis, bit), basis)
                };
                let r = &mut run.signals[*i];
                r.bob_outcome = Some(got);
                r.backward_noise = Some(noise);
                r.eve_backward = eve;
                received.push(got);
            }
            (session.expanded().clone(), m_prime, received.xor(&b)?)
        }
        Variant::Depolarizing => {
            let mut m = BitVector::zeros(0);
            let mut bob_m = BitVector::zeros(0);
            for (i, q) in &p1.key {
                let (m1, m2): (bool, bool) = (run.message.random(), run.message.random());
                let mut q = q.expect("code qubits stay unmeasured");
                if m2 {
                    q.apply(Pauli::Z);
                }
                if m1 {
                    q.apply(Pauli::X);
                }
                let basis = run.signals[*i].bob_basis;
                let (outcome, noise, eve) = run.send_backward(q, basis);
                let r = &mut run.signals[*i];
                r.alice_op = Some(Pauli::from_bits(m1, m2));
                r.m1 = Some(m1);
                r.m2 = Some(m2);
                r.bob_outcome = Some(outcome);
                r.backward_noise = Some(noise);
                r.eve_backward = eve;
                m.push(if basis == Basis::Z { m1 } else { m2 });
                bob_m.push(outcome ^ r.bob_bit);
            }
            let m_prime = f.apply(&m)?;
            (m, m_prime, bob_m)
        }
    };

    let pattern = bob_m.hamming_distance(&m)?;
    let bob_before = f.apply(&bob_m)?;
    // ideal EC: Bob's copy of m is corrected to Alice's
    let corrected = m.clone();
    let bob_secret = f.apply(&corrected)?;
    let delayed = DelayedOutcome {
        n_pa,
        m_prime_digest: key_digest(&m_prime),
        recovered_via_key,
        recovered_via_rawkey,
        bob_matches_before_ec: bob_before == m_prime,
        bob_recovered: bob_secret == m_prime,
        pattern_weight: pattern,
    };
    let est = est.with_roundtrip(Tally::new(n, pattern));
    let e_ec = pattern as f64 / n as f64;
    let mut t = with_raw_keys(run.transcript(p1.sift), a, b, &f);
    if variant == Variant::Depolarizing {
        // Alice never measures the code qubits: there is no raw key `a`
        t.raw_alice = None;
    }
    finish_integrated(t, cfg, est, e_ec, m_prime, bob_secret, delayed)
}

fn with_raw_keys(
    mut t: ProtocolTranscript,
    a: BitVector,
    b: BitVector,
    f: &AdditivePaFunction,
) -> ProtocolTranscript {
    t.raw_alice = Some(a);
    t.raw_bob = Some(b);
    t.pa_seed = f.toeplitz_seed().cloned();
    t
}

fn finish_integrated(
    mut t: ProtocolTranscript,
    cfg: &SimConfig,
    est: ErrorEstimate,
    e_ec: f64,
    alice_secret: BitVector,
    bob_secret: BitVector,
    delayed: DelayedOutcome,
) -> Result<ProtocolTranscript> {
    let l = ledger(cfg, cfg.n_test(), e_ec, &est)?;
    t.error_estimate = Some(est);
    t.key_ledger = Some(l.clone());
    t.delayed = Some(delayed);
    if l.abort {
        return Ok(abort(t, ledger_abort_reason(&l)));
    }
    t.alice_key = Some(alice_secret);
    t.bob_key = Some(bob_secret);
    Ok(t)
}

/// Trusted relay: Alice (the relay) runs Protocol 1 with Bob and shares a
/// key pool with Charlie. In the delayed scheme she sends `a ⊕ m` for `n`
/// pool bits `m`, and Bob and Charlie both compress `m` with `f`; in the
/// normal scheme she pads `f(a)` with `N_PA` pool bits.
pub fn run_relay(cfg: &SimConfig) -> Result<ProtocolTranscript> {
    cfg.validate()?;
    let n = cfg.n;
    let pool_size = cfg.pool();
    let mut run = Run::new(cfg);
    let p1 = run.protocol1(true)?;
    let (a, b) = run.raw_keys(&p1.key);
    let pool = BitVector::random(pool_size, &mut run.message);
    let mut t = run.transcript(p1.sift);
    t.raw_alice = Some(a.clone());
    t.raw_bob = Some(b);
    let est = match estimate_or_abort(&p1.tests, cfg) {
        Ok(e) => e,
        Err(reason) => return Ok(abort(t, reason)),
    };
    let l = ledger(cfg, cfg.n_test(), est.e_b, &est)?;
    t.error_estimate = Some(est);
    t.key_ledger = Some(l.clone());
    if l.abort {
        return Ok(abort(t, ledger_abort_reason(&l)));
    }
    let n_pa = l.n_pa;
    let needed = match cfg.relay_scheme {
        RelayScheme::Delayed => n,
        RelayScheme::Normal => n_pa,
    };
    if needed > pool_size {
        return Err(Error::PoolExhausted {
            needed,
            available: pool_size,
        });
    }
    // the seed travels from Bob to Charlie in the clear
    let f = pa_function(cfg, t.seed, n_pa, n, false)?;
    t.pa_seed = f.toeplitz_seed().cloned();
    // ideal EC on the Alice-Bob link
    let bob_raw = a.clone();
    let (bob_key, charlie_key) = match cfg.relay_scheme {
        RelayScheme::Delayed => {
            let m = pool.slice(0, n);
            let c = a.xor(&m)?;
            let bob_m = c.xor(&bob_raw)?;
            (f.apply(&bob_m)?, f.apply(&m)?)
        }
        RelayScheme::Normal => {
            let m_prime = pool.slice(0, n_pa);
            let c = m_prime.xor(&f.apply(&a)?)?;
            (c.xor(&f.apply(&bob_raw)?)?, m_prime)
        }
    };
    let mut l = l;
    l.pool_consumed = Some(needed);
    t.key_ledger = Some(l);
    t.relay = Some(RelayOutcome {
        scheme: cfg.relay_scheme,
        pool_size,
        pool_consumed: needed,
        normal_pool_consumed: n_pa,
        delayed_pool_consumed: n,
        n_pa,
        bob_key_digest: key_digest(&bob_key),
        charlie_key_digest: key_digest(&charlie_key),
        keys_match: bob_key == charlie_key,
    });
    // for the relay the two final-key slots hold Bob's and Charlie's keys
    t.alice_key = Some(bob_key);
    t.bob_key = Some(charlie_key);
    Ok(t)
}

pub fn simulate(cfg: &SimConfig) -> Result<ProtocolTranscript> {
    match cfg.protocol {
        ProtocolKind::Bb84 => run_bb84(cfg),
        ProtocolKind::Dqkd => run_dqkd(cfg),
        ProtocolKind::Relay => run_relay(cfg),
        _ => run_integrated(cfg),
    }
}

/// Run with a concrete seed (drawing one if absent) and summarize.
pub fn simulate_report(cfg: &SimConfig) -> Result<(Report, ProtocolTranscript)> {
    let mut cfg = cfg.clone();
    cfg.seed = Some(cfg.seed.unwrap_or_else(fresh_seed));
    let start = Instant::now();
    let t = simulate(&cfg)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    Ok((Report::new(&cfg, &t, elapsed), t))
}
