//! Joint states of the backward line with and without Alice's measurement.
//!
//! With measurement, Alice measures her qubit `A` of `|Ψ⟩_{AĀ}` in basis `w`,
//! one-time-pads the outcome with a uniform message bit `m` and re-encodes
//! `m ⊕ a` as a `w` eigenstate. Without measurement she applies
//! `X^{m1} Z^{m2}` for two uniform bits. Tracing out the register that the
//! basis does not select makes the two states coincide; [`verify_2c_2d`]
//! measures how far apart they are numerically.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::state::{DensityMatrix, PureState};
use super::{c, Basis, Pauli, A, C64, CONSTRUCTION_TOL, M, M1, M2};
use crate::error::{Error, Result};

/// `|Ψ⟩ = Σ_i λ_i |i_w⟩_A |e_i⟩_Ā` with normalized (not necessarily
/// orthogonal) companions `|e_i⟩`.
#[derive(Debug, Clone)]
pub struct BasisDecomposition {
    pub basis: Basis,
    pub lambdas: [C64; 2],
    pub companions: [PureState; 2],
}

impl BasisDecomposition {
    /// `λ_a |e_a⟩ = (⟨a_w| ⊗ I)|Ψ⟩`, the unnormalized conditional state.
    pub fn conditional(&self, a: bool) -> DVector<C64> {
        let i = a as usize;
        self.companions[i].amplitudes() * self.lambdas[i]
    }

    /// `Σ_i λ_i |i_w⟩ ⊗ |e_i⟩` as a flat vector with `A` first.
    pub fn reassemble(&self) -> DVector<C64> {
        [false, true]
            .iter()
            .map(|&a| self.basis.ket(a).kronecker(&self.conditional(a)))
            .fold(None::<DVector<C64>>, |acc, v| {
                Some(acc.map_or(v.clone(), |s| s + v))
            })
            .expect("two terms")
    }

    pub fn weight_error(&self) -> f64 {
        (self.lambdas.iter().map(|l| l.norm_sqr()).sum::<f64>() - 1.0).abs()
    }
}

fn check_leading_qubit(psi: &PureState) -> Result<()> {
    match (psi.labels().first(), psi.dims().first()) {
        (Some(l), Some(2)) if l == A => Ok(()),
        _ => Err(Error::InvalidState(format!(
            "expected qubit `{A}` as first subsystem, got labels {:?} dims {:?}",
            psi.labels(),
            psi.dims()
        ))),
    }
}

fn rest_layout(psi: &PureState) -> (Vec<usize>, Vec<&str>) {
    (
        psi.dims()[1..].to_vec(),
        psi.labels()[1..].iter().map(String::as_str).collect(),
    )
}

/// Split `|Ψ⟩_{AĀ}` along the `w` eigenbasis of `A`.
pub fn decompose(psi: &PureState, basis: Basis) -> Result<BasisDecomposition> {
    check_leading_qubit(psi)?;
    let (dims, labels) = rest_layout(psi);
    let mut lambdas = [c(0.0, 0.0); 2];
    let mut companions = Vec::with_capacity(2);
    for a in [false, true] {
        let (v, _, _) = psi.contract(A, &basis.eigenstate(a))?;
        let norm = v.norm();
        let companion = if norm > CONSTRUCTION_TOL {
            lambdas[a as usize] = c(norm, 0.0);
            PureState::new(v / c(norm, 0.0), &dims, &labels)?
        } else {
            // λ = 0: any normalized companion reassembles the same state
            PureState::basis(0, &dims, &labels)?
        };
        companions.push(companion);
    }
    let companions: [PureState; 2] = companions.try_into().expect("two companions");
    Ok(BasisDecomposition {
        basis,
        lambdas,
        companions,
    })
}

/// `ρ_{MAĀ} = ½ Σ_{a,m} P(|m⟩_M |(m⊕a)_w⟩_A |Ψ(a,w)⟩_Ā)`, the state after
/// measuring `A` in `w`, one-time-padding with `m` and discarding the record
/// of `a`.
pub fn build_2c_state(psi: &PureState, basis: Basis) -> Result<DensityMatrix> {
    let split = decompose(psi, basis)?;
    let (rest_dims, rest_labels) = rest_layout(psi);
    let dim = 4 * rest_dims.iter().product::<usize>();
    let mut entries = DMatrix::<C64>::zeros(dim, dim);
    for m in [false, true] {
        for a in [false, true] {
            let v = Basis::Z
                .ket(m)
                .kronecker(&basis.ket(m ^ a))
                .kronecker(&split.conditional(a));
            entries += (&v * v.adjoint()) * c(0.5, 0.0);
        }
    }
    let mut dims = vec![2, 2];
    dims.extend(rest_dims);
    let mut labels = vec![M, A];
    labels.extend(rest_labels);
    DensityMatrix::from_parts(entries, &dims, &labels)
}

/// Order of the two Pauli factors in the depolarizing encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EncodingOrder {
    /// `X^{m1} Z^{m2}`: `Z` acts first.
    #[default]
    ZFirst,
    /// `Z^{m2} X^{m1}`: `X` acts first.
    XFirst,
}

/// `ρ_{M1M2AĀ} = ¼ Σ_{m1,m2} |m1 m2⟩⟨m1 m2| ⊗ U |Ψ⟩⟨Ψ| U†` with
/// `U = (X^{m1} Z^{m2})_A`. The result does not depend on any basis.
pub fn build_2d_state(psi: &PureState) -> Result<DensityMatrix> {
    build_2d_state_with_order(psi, EncodingOrder::ZFirst)
}

pub fn build_2d_state_with_order(psi: &PureState, order: EncodingOrder) -> Result<DensityMatrix> {
    check_leading_qubit(psi)?;
    let x = Pauli::X.matrix();
    let z = Pauli::Z.matrix();
    let id = Pauli::I.matrix();
    let rho = psi.projector();
    let mut entries = DMatrix::<C64>::zeros(4 * psi.dim(), 4 * psi.dim());
    for m1 in [false, true] {
        for m2 in [false, true] {
            let xm = if m1 { &x } else { &id };
            let zm = if m2 { &z } else { &id };
            let u = match order {
                EncodingOrder::ZFirst => xm * zm,
                EncodingOrder::XFirst => zm * xm,
            };
            let encoded = rho.conjugate_local(&u, A)?;
            let reg = Basis::Z.ket(m1).kronecker(&Basis::Z.ket(m2));
            entries += (&reg * reg.adjoint()).kronecker(encoded.entries()) * c(0.25, 0.0);
        }
    }
    let mut dims = vec![2, 2];
    dims.extend_from_slice(psi.dims());
    let mut labels = vec![M1, M2];
    labels.extend(psi.labels().iter().map(String::as_str));
    DensityMatrix::from_parts(entries, &dims, &labels)
}

/// Frobenius distances between the measured and depolarized variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    /// `‖Tr_{M2} ρ_{2d} − ρ_{2c}(z)‖` with `M1` read as the message register.
    pub delta_z: f64,
    /// `‖Tr_{M1} ρ_{2d} − ρ_{2c}(x)‖` with `M2` read as the message register.
    pub delta_x: f64,
}

impl Equivalence {
    pub fn max(&self) -> f64 {
        self.delta_z.max(self.delta_x)
    }
}

pub fn verify_2c_2d(psi: &PureState) -> Result<Equivalence> {
    let depolarized = build_2d_state(psi)?;
    let rest: Vec<&str> = psi.labels()[1..].iter().map(String::as_str).collect();
    let marginal = |keep_register: &str| -> Result<DensityMatrix> {
        let mut keep = vec![keep_register, A];
        keep.extend(rest.iter().copied());
        depolarized.partial_trace(&keep)?.relabel(keep_register, M)
    };
    let delta_z = marginal(M1)?.distance(&build_2c_state(psi, Basis::Z)?)?;
    let delta_x = marginal(M2)?.distance(&build_2c_state(psi, Basis::X)?)?;
    Ok(Equivalence { delta_z, delta_x })
}

/// Outcome of [`equivalence_trials`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceTrials {
    pub trials: usize,
    pub max_abar_dim: usize,
    pub max_delta_z: f64,
    pub max_delta_x: f64,
    /// Largest `‖ρ_{2d}(X^{m1}Z^{m2}) − ρ_{2d}(Z^{m2}X^{m1})‖`.
    pub max_order_swap: f64,
}

impl EquivalenceTrials {
    pub fn max_delta(&self) -> f64 {
        self.max_delta_z.max(self.max_delta_x)
    }
}

/// [`verify_2c_2d`] and the encoding-order check on `trials` random pure
/// states `|Ψ⟩_{AĀ}`, with `dim Ā` cycling through `1..=max_abar_dim`.
pub fn equivalence_trials<R: rand::Rng + ?Sized>(
    trials: usize,
    max_abar_dim: usize,
    rng: &mut R,
) -> Result<EquivalenceTrials> {
    if max_abar_dim == 0 {
        return Err(Error::InvalidState(
            "Abar needs dimension at least 1".into(),
        ));
    }
    let states = (0..trials)
        .map(|t| PureState::random(&[2, 1 + t % max_abar_dim], &[A, super::ABAR], rng))
        .collect::<Result<Vec<_>>>()?;
    let results = crate::par::map_slice(&states, |psi| -> Result<(Equivalence, f64)> {
        let eq = verify_2c_2d(psi)?;
        let swap = build_2d_state_with_order(psi, EncodingOrder::ZFirst)?
            .distance(&build_2d_state_with_order(psi, EncodingOrder::XFirst)?)?;
        Ok((eq, swap))
    });
    let mut out = EquivalenceTrials {
        trials,
        max_abar_dim,
        max_delta_z: 0.0,
        max_delta_x: 0.0,
        max_order_swap: 0.0,
    };
    for r in results {
        let (eq, swap) = r?;
        out.max_delta_z = out.max_delta_z.max(eq.delta_z);
        out.max_delta_x = out.max_delta_x.max(eq.delta_x);
        out.max_order_swap = out.max_order_swap.max(swap);
    }
    Ok(out)
}
