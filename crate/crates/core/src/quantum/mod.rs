//! Dense complex linear algebra for few-qubit states.
//!
//! Subsystems are addressed by label. The conventional names used across the
//! crate are [`A`] (the qubit Alice receives), [`ABAR`] (everything else,
//! Eve and Bob included), [`M`] for a message register and [`M1`]/[`M2`] for
//! the two registers that drive the depolarizing encoding.

mod backward;
mod state;

pub use backward::{
    build_2c_state, build_2d_state, build_2d_state_with_order, decompose, equivalence_trials,
    verify_2c_2d, BasisDecomposition, EncodingOrder, Equivalence, EquivalenceTrials,
};
pub use state::{frobenius_distance, hermitian_eigenvalues, trace_norm, DensityMatrix, PureState};

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub type C64 = Complex<f64>;

pub const A: &str = "A";
pub const ABAR: &str = "Abar";
pub const M: &str = "M";
pub const M1: &str = "M1";
pub const M2: &str = "M2";

/// Tolerance for norms, traces and hermiticity of constructed states.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for equality of states built along two different routes.
pub const EQUIVALENCE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Measurement and preparation basis of a qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Z, Basis::X];

    /// `|bit_w⟩`: `|0_z⟩ = (1, 0)`, `|1_z⟩ = (0, 1)`, `|0_x⟩ = (1, 1)/√2`,
    /// `|1_x⟩ = (1, -1)/√2`.
    pub fn eigenstate(self, bit: bool) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match (self, bit) {
            (Basis::Z, false) => [c(1.0, 0.0), c(0.0, 0.0)],
            (Basis::Z, true) => [c(0.0, 0.0), c(1.0, 0.0)],
            (Basis::X, false) => [c(h, 0.0), c(h, 0.0)],
            (Basis::X, true) => [c(h, 0.0), c(-h, 0.0)],
        }
    }

    pub fn ket(self, bit: bool) -> DVector<C64> {
        DVector::from_row_slice(&self.eigenstate(bit))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Basis::X => "x",
            Basis::Z => "z",
        }
    }
}

/// The Pauli operators `I`, `X`, `Y = iXZ` and `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> DMatrix<C64> {
        let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
        let entries = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        };
        DMatrix::from_row_slice(2, 2, &entries)
    }

    /// `X^x Z^z` up to the phase of `Y`: `(x, z)` bits of the operator.
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    /// Whether the operator flips eigenstates of `basis`.
    pub fn flips(self, basis: Basis) -> bool {
        match basis {
            Basis::Z => matches!(self, Pauli::X | Pauli::Y),
            Basis::X => matches!(self, Pauli::Z | Pauli::Y),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        }
    }
}

/// Matrix of a Pauli by name (`"I"`, `"X"`, `"Y"` or `"Z"`).
pub fn pauli(name: &str) -> Option<DMatrix<C64>> {
    let p = match name {
        "I" => Pauli::I,
        "X" => Pauli::X,
        "Y" => Pauli::Y,
        "Z" => Pauli::Z,
        _ => return None,
    };
    Some(p.matrix())
}

/// `P(|φ⟩) = |φ⟩⟨φ|`.
pub fn projector(phi: &PureState) -> DensityMatrix {
    phi.projector()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<C64>, b: &DMatrix<C64>) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (Pauli::X.matrix(), Pauli::Y.matrix(), Pauli::Z.matrix());
        assert!(close(&(&x * &z), &-(&z * &x)));
        assert!(close(&y, &((&x * &z) * c(0.0, 1.0))));
        for p in Pauli::ALL {
            let m = p.matrix();
            assert!(close(&(&m * &m), &Pauli::I.matrix()));
            assert!(close(&m, &m.adjoint()));
        }
        assert!(pauli("Q").is_none());
        assert!(close(&pauli("Y").unwrap(), &y));
    }

    #[test]
    fn x_flips_z_eigenstates() {
        let out = Pauli::X.matrix() * Basis::Z.ket(false);
        assert!((out - Basis::Z.ket(true)).norm() < 1e-15);
    }

    #[test]
    fn flips_agrees_with_matrix_action() {
        for basis in Basis::ALL {
            for p in Pauli::ALL {
                for bit in [false, true] {
                    let out = p.matrix() * basis.ket(bit);
                    let overlap = basis.ket(!bit).dotc(&out).norm();
                    assert_eq!(overlap > 0.5, p.flips(basis), "{p:?} on {basis:?}");
                }
            }
        }
    }
}
