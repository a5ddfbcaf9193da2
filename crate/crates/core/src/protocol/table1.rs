//! Key bit value as a function of Bob's basis and Alice's encoding operation.
//!
//! | basis | 0        | 1        |
//! |-------|----------|----------|
//! | x     | `I`, `X` | `Z`, `Y` |
//! | z     | `I`, `Z` | `X`, `Y` |

use rand::Rng;

use crate::quantum::{Basis, Pauli};

pub fn decode_key_bit(basis: Basis, op: Pauli) -> bool {
    match (basis, op) {
        (Basis::X, Pauli::I | Pauli::X) => false,
        (Basis::X, Pauli::Z | Pauli::Y) => true,
        (Basis::Z, Pauli::I | Pauli::Z) => false,
        (Basis::Z, Pauli::X | Pauli::Y) => true,
    }
}

/// The two operations that encode `bit` in `basis`.
pub fn ops_for_bit(basis: Basis, bit: bool) -> [Pauli; 2] {
    match (basis, bit) {
        (Basis::X, false) => [Pauli::I, Pauli::X],
        (Basis::X, true) => [Pauli::Z, Pauli::Y],
        (Basis::Z, false) => [Pauli::I, Pauli::Z],
        (Basis::Z, true) => [Pauli::X, Pauli::Y],
    }
}

/// One of the two encoding operations for `bit`, each with probability ½.
pub fn op_for_bit<R: Rng + ?Sized>(basis: Basis, bit: bool, rng: &mut R) -> Pauli {
    ops_for_bit(basis, bit)[usize::from(rng.random::<bool>())]
}

/// One row of the table check: the decoded bit against a noiseless
/// single-signal round trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Table1Case {
    pub basis: Basis,
    pub op: Pauli,
    pub prepared: bool,
    pub table_bit: bool,
    pub simulated_bit: bool,
}

impl Table1Case {
    pub fn passed(&self) -> bool {
        self.table_bit == self.simulated_bit
    }
}

/// Bob prepares `|prepared_w⟩`, Alice applies `op`, Bob measures in `w` and
/// XORs out his prepared bit; every combination of basis, operation and
/// prepared bit.
pub fn table1_round_trips() -> Vec<Table1Case> {
    use super::channel::Qubit;
    use rand::SeedableRng;

    // eigenstate outcomes are deterministic; the generator is never decisive
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let mut cases = Vec::with_capacity(16);
    for basis in Basis::ALL {
        for op in Pauli::ALL {
            for prepared in [false, true] {
                let mut q = Qubit::prepare(basis, prepared);
                q.apply(op);
                let simulated_bit = q.measure(basis, &mut rng) ^ prepared;
                cases.push(Table1Case {
                    basis,
                    op,
                    prepared,
                    table_bit: decode_key_bit(basis, op),
                    simulated_bit,
                });
            }
        }
    }
    cases
}
