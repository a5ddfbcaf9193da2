//! Per-signal records and the summary report of a simulation run.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::channel::Interception;
use super::config::{ProtocolKind, RelayScheme, SimConfig};
use super::estimate::ErrorEstimate;
use super::keyrate::KeyLedger;
use crate::gf2::BitVector;
use crate::quantum::{Basis, Pauli};

/// What Alice did with a forward signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Measured in a basis of her choice (check mode, or sifted BB84).
    Check,
    /// Measured in Bob's announced basis (BB84 with quantum memory).
    Memory,
    /// Applied a Pauli and returned the qubit.
    Encode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// Disclosed to estimate the forward-line error rates.
    Test,
    /// Key bit disclosed to estimate the round-trip error rate.
    KeyTest,
    /// Part of the raw key.
    Key,
    /// Lost to basis sifting, or a test signal measured in the wrong basis.
    Discarded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    pub index: usize,
    pub bob_basis: Basis,
    pub bob_bit: bool,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alice_basis: Option<Basis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alice_outcome: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alice_op: Option<Pauli>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m1: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2: Option<bool>,
    /// Bit Bob measured (or read) on the backward line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bob_outcome: Option<bool>,
    pub forward_noise: Pauli,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backward_noise: Option<Pauli>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eve_forward: Option<Interception>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eve_backward: Option<Interception>,
    pub role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SiftStats {
    /// Forward signals sent.
    pub signals: usize,
    /// Signals that could carry key before sifting: every forward signal for
    /// BB84, encode-mode signals for two-way runs.
    pub eligible: usize,
    /// Eligible signals that ended up as raw or key-test bits.
    pub kept: usize,
    pub fraction: f64,
}

impl SiftStats {
    pub fn new(signals: usize, eligible: usize, kept: usize) -> Self {
        Self {
            signals,
            eligible,
            kept,
            fraction: if eligible == 0 {
                0.0
            } else {
                kept as f64 / eligible as f64
            },
        }
    }
}

/// How the backward message of an integrated run was carried and recovered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayedOutcome {
    pub n_pa: usize,
    pub m_prime_digest: String,
    /// `f(c) ⊕ f(a)` equals `m'` (delayed variants with a session).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered_via_key: Option<bool>,
    /// `f(c ⊕ a)` equals `m'`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered_via_rawkey: Option<bool>,
    /// Bob's secret equals `m'` before error correction.
    pub bob_matches_before_ec: bool,
    /// Bob's secret equals `m'` after error correction.
    pub bob_recovered: bool,
    /// Errors in Bob's copy of the backward message before correction.
    pub pattern_weight: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayOutcome {
    pub scheme: RelayScheme,
    pub pool_size: usize,
    pub pool_consumed: usize,
    /// What the normal scheme (pad on the final key) consumes: `N_PA`.
    pub normal_pool_consumed: usize,
    /// What the delayed scheme (pool bits as the message) consumes: `n`.
    pub delayed_pool_consumed: usize,
    pub n_pa: usize,
    pub bob_key_digest: String,
    pub charlie_key_digest: String,
    pub keys_match: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub signals: Vec<SignalRecord>,
    pub error_estimate: Option<ErrorEstimate>,
    pub key_ledger: Option<KeyLedger>,
    pub abort: bool,
    pub abort_reason: Option<String>,
    pub sift: SiftStats,
    /// Raw keys `a` and `b`.
    pub raw_alice: Option<BitVector>,
    pub raw_bob: Option<BitVector>,
    /// Final secrets; for integrated runs, Alice's `m'` and Bob's recovery.
    pub alice_key: Option<BitVector>,
    pub bob_key: Option<BitVector>,
    pub pa_seed: Option<BitVector>,
    pub delayed: Option<DelayedOutcome>,
    pub relay: Option<RelayOutcome>,
}

impl ProtocolTranscript {
    pub fn keys_match(&self) -> Option<bool> {
        match (&self.alice_key, &self.bob_key) {
            (Some(a), Some(b)) => Some(a == b),
            _ => None,
        }
    }
}

/// SHA-256 over the bit length (u64, little endian) followed by the packed bytes.
pub fn key_digest(key: &BitVector) -> String {
    let mut h = Sha256::new();
    h.update((key.len() as u64).to_le_bytes());
    h.update(key.to_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// The JSON summary of a run. Everything except `timing` is a deterministic
/// function of the configuration (including its seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub config: SimConfig,
    pub error_estimate: Option<ErrorEstimate>,
    pub key_ledger: Option<KeyLedger>,
    pub abort: bool,
    pub abort_reason: Option<String>,
    pub key_length: Option<usize>,
    pub key_digest: Option<String>,
    pub keys_match: Option<bool>,
    pub sift: SiftStats,
    pub delayed: Option<DelayedOutcome>,
    pub relay: Option<RelayOutcome>,
    pub timing: Timing,
}

impl Report {
    pub fn new(config: &SimConfig, t: &ProtocolTranscript, elapsed_ms: f64) -> Self {
        let mut config = config.clone();
        config.seed = Some(t.seed);
        Self {
            protocol: t.protocol,
            seed: t.seed,
            config,
            error_estimate: t.error_estimate.clone(),
            key_ledger: t.key_ledger.clone(),
            abort: t.abort,
            abort_reason: t.abort_reason.clone(),
            key_length: t.alice_key.as_ref().map(BitVector::len),
            key_digest: t.alice_key.as_ref().map(key_digest),
            keys_match: t.keys_match(),
            sift: t.sift,
            delayed: t.delayed.clone(),
            relay: t.relay.clone(),
            timing: Timing { elapsed_ms },
        }
    }

    /// The report as JSON with the timing field zeroed.
    pub fn deterministic_json(&self) -> String {
        let mut r = self.clone();
        r.timing.elapsed_ms = 0.0;
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_covers_length() {
        let a = BitVector::zeros(8);
        let b = BitVector::zeros(7);
        assert_eq!(a.to_bytes(), b.to_bytes());
        assert_ne!(key_digest(&a), key_digest(&b));
        assert_eq!(key_digest(&a).len(), 64);
    }

    #[test]
    fn empty_digest_is_hash_of_zero_length() {
        let expected = hex::encode(Sha256::digest(0u64.to_le_bytes()));
        assert_eq!(key_digest(&BitVector::zeros(0)), expected);
    }
}
