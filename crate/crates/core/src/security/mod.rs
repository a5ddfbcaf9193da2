//! ε-security of a key against classical and quantum adversaries, and the
//! exhaustive comparison of normal and delayed privacy amplification.

mod epsilon;
mod eve;
mod theorem1;

pub use epsilon::{classical_epsilon, cq_epsilon, ClassicalJoint, CqJoint};
pub use eve::{default_bank, parse_bank, EveModel, EveSpec, NamedEve, Prior, QuantumEveModel};
pub use theorem1::{
    delayed_joints, full_rank_functions, theorem1_sweep, theorem1_sweep_quantum, theorem1_verify,
    theorem1_verify_quantum, theorem1_verify_with, MessageLaw, Scenario, SecurityReport,
    Theorem1Outcome, Theorem1Sweep, MAX_CLASSICAL_N, MAX_ENUMERATED_ENTRIES, MAX_EVE_DIM,
    MAX_QUANTUM_N,
};
