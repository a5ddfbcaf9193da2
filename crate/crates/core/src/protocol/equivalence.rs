//! The state `|Ψ⟩_{AĀ}` of a simulated forward signal as Alice receives it,
//! purified over Bob's prepared bit, Eve's measurement record and the
//! channel's Kraus index, and the measured/depolarized comparison on it.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::channel::{ChannelModel, Qubit};
use super::transcript::{ProtocolTranscript, Role, SignalRecord};
use crate::error::{Error, Result};
use crate::par;
use crate::quantum::{c, verify_2c_2d, PureState, A, ABAR, C64};

/// `Σ_b 2^{-1/2} Σ_o Σ_k √p_k ⟨o_u|b_w⟩ P_k|o_u⟩_A |b, o, k⟩_Ā` where `u` is
/// Eve's basis for this signal (no `o` register when she did not intercept).
pub fn signal_state(record: &SignalRecord, forward: &ChannelModel) -> Result<PureState> {
    let weights = forward.pauli_weights();
    let eve = record.eve_forward;
    let outcomes = if eve.is_some() { 2 } else { 1 };
    let abar = 2 * outcomes * 4;
    let mut amps = DVector::<C64>::zeros(2 * abar);
    let w = record.bob_basis;
    for b in [false, true] {
        for o in 0..outcomes {
            let (resent, overlap) = match eve {
                Some(i) => {
                    let bra = i.basis.eigenstate(o == 1);
                    let ket = w.eigenstate(b);
                    let overlap = bra[0].conj() * ket[0] + bra[1].conj() * ket[1];
                    (Qubit::prepare(i.basis, o == 1), overlap)
                }
                None => (Qubit::prepare(w, b), c(1.0, 0.0)),
            };
            for (k, (p, weight)) in crate::quantum::Pauli::ALL
                .into_iter()
                .zip(weights)
                .enumerate()
            {
                if weight == 0.0 {
                    continue;
                }
                let mut q = resent;
                q.apply(p);
                let coeff = overlap * c(std::f64::consts::FRAC_1_SQRT_2 * weight.sqrt(), 0.0);
                let col = (usize::from(b) * outcomes + o) * 4 + k;
                for (alpha, amp) in q.amplitudes().into_iter().enumerate() {
                    amps[alpha * abar + col] += coeff * amp;
                }
            }
        }
    }
    PureState::normalized(amps, &[2, abar], &[A, ABAR])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalEquivalence {
    pub signals: Vec<usize>,
    pub max_delta_z: f64,
    pub max_delta_x: f64,
}

impl SignalEquivalence {
    pub fn max(&self) -> f64 {
        self.max_delta_z.max(self.max_delta_x)
    }
}

/// Up to `samples` key signals of a run, drawn without replacement, each
/// checked with [`verify_2c_2d`] on its state as Alice receives it (before
/// she measures or encodes).
pub fn check_signal_equivalence<R: Rng + ?Sized>(
    t: &ProtocolTranscript,
    forward: &ChannelModel,
    samples: usize,
    rng: &mut R,
) -> Result<SignalEquivalence> {
    let candidates: Vec<&SignalRecord> = t.signals.iter().filter(|r| r.role == Role::Key).collect();
    if candidates.is_empty() {
        return Err(Error::InvalidState("no key signals in transcript".into()));
    }
    let mut chosen =
        rand::seq::index::sample(rng, candidates.len(), samples.min(candidates.len())).into_vec();
    chosen.sort_unstable();
    let picked: Vec<&SignalRecord> = chosen.iter().map(|&i| candidates[i]).collect();
    let results = par::map_slice(&picked, |r| verify_2c_2d(&signal_state(r, forward)?));
    let mut out = SignalEquivalence {
        signals: picked.iter().map(|r| r.index).collect(),
        max_delta_z: 0.0,
        max_delta_x: 0.0,
    };
    for e in results {
        let e = e?;
        out.max_delta_z = out.max_delta_z.max(e.delta_z);
        out.max_delta_x = out.max_delta_x.max(e.delta_x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::channel::Interception;
    use crate::protocol::transcript::Mode;
    use crate::quantum::{Basis, Pauli, EQUIVALENCE_TOL};

    fn record(basis: Basis, eve: Option<Interception>) -> SignalRecord {
        SignalRecord {
            index: 0,
            bob_basis: basis,
            bob_bit: false,
            mode: Mode::Encode,
            alice_basis: None,
            alice_outcome: None,
            alice_op: None,
            m1: None,
            m2: None,
            bob_outcome: None,
            forward_noise: Pauli::I,
            backward_noise: None,
            eve_forward: eve,
            eve_backward: None,
            role: Role::Key,
        }
    }

    #[test]
    fn noiseless_signal_is_maximally_entangled_with_bob() {
        let psi = signal_state(&record(Basis::Z, None), &ChannelModel::Noiseless).unwrap();
        let rho_a = psi.projector().partial_trace(&[A]).unwrap();
        let half = crate::quantum::DensityMatrix::maximally_mixed(&[2], &[A]).unwrap();
        assert!(rho_a.distance(&half).unwrap() < 1e-12);
    }

    #[test]
    fn equivalence_on_simulated_signal_states() {
        let eve = Interception {
            basis: Basis::X,
            outcome: true,
        };
        for basis in Basis::ALL {
            for e in [None, Some(eve)] {
                for ch in [
                    ChannelModel::Noiseless,
                    ChannelModel::Bsc(0.1),
                    ChannelModel::Depolarizing(0.3),
                ] {
                    let psi = signal_state(&record(basis, e), &ch).unwrap();
                    assert!(verify_2c_2d(&psi).unwrap().max() < EQUIVALENCE_TOL);
                }
            }
        }
    }
}
