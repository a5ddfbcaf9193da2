//! Exhaustive comparison of normal and delayed privacy amplification.
//!
//! Normal: the key is `f(a)` and Eve holds `E`. Delayed: a uniform message
//! `m′` is expanded to a uniform `m ∈ f⁻¹[m′]`, Eve holds `E` and `a ⊕ m`,
//! and the key is `m′`. Both ε values are computed from the full joint law.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::epsilon::{classical_epsilon, cq_epsilon, ClassicalJoint, CqJoint};
use super::eve::{EveModel, Prior, QuantumEveModel};
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};
use crate::pa::AdditivePaFunction;
use crate::par;
use crate::quantum::C64;

/// Largest key length for the classical exhaustive verifier.
pub const MAX_CLASSICAL_N: usize = 6;
/// Largest key length for the quantum exhaustive verifier.
pub const MAX_QUANTUM_N: usize = 4;
/// Largest adversary dimension for the quantum exhaustive verifier.
pub const MAX_EVE_DIM: usize = 4;
/// Largest number of matrix entries enumerated by [`full_rank_functions`].
pub const MAX_ENUMERATED_ENTRIES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    NormalPa,
    DelayedPa,
}

/// How the delayed-scenario message is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageLaw {
    /// Uniform `m′`, then `m` uniform over `f⁻¹[m′]`.
    #[default]
    Preimage,
    /// `m` uniform over all strings and `m′ = f(m)`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub epsilon: f64,
    pub scenario: Scenario,
    pub n: usize,
    pub n_pa: usize,
    /// Rows of the PA matrix as 0/1 strings.
    pub matrix: Vec<String>,
    pub eve_model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Outcome {
    pub key: SecurityReport,
    pub msg: SecurityReport,
}

impl Theorem1Outcome {
    pub fn deviation(&self) -> f64 {
        (self.key.epsilon - self.msg.epsilon).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Sweep {
    pub cases: usize,
    pub functions: usize,
    pub models: usize,
    pub max_deviation: f64,
    pub worst: Option<Theorem1Outcome>,
    #[serde(skip)]
    pub outcomes: Vec<Theorem1Outcome>,
}

impl Theorem1Sweep {
    fn collect(functions: usize, models: usize, outcomes: Vec<Theorem1Outcome>) -> Self {
        // first maximum in enumeration order keeps the report stable
        let worst = outcomes
            .iter()
            .fold(None::<&Theorem1Outcome>, |best, o| match best {
                Some(b) if b.deviation() >= o.deviation() => Some(b),
                _ => Some(o),
            })
            .cloned();
        Self {
            cases: outcomes.len(),
            functions,
            models,
            max_deviation: worst.as_ref().map_or(0.0, Theorem1Outcome::deviation),
            worst,
            outcomes,
        }
    }
}

fn index_of(v: &BitVector) -> usize {
    v.iter()
        .enumerate()
        .fold(0, |acc, (i, b)| acc | (b as usize) << i)
}

fn matrix_rows(f: &AdditivePaFunction) -> Vec<String> {
    (0..f.n_pa())
        .map(|i| f.matrix().row(i).to_string())
        .collect()
}

fn report(f: &AdditivePaFunction, scenario: Scenario, epsilon: f64, eve: &str) -> SecurityReport {
    SecurityReport {
        epsilon,
        scenario,
        n: f.n(),
        n_pa: f.n_pa(),
        matrix: matrix_rows(f),
        eve_model: eve.to_string(),
    }
}

/// `f(a)` for every `a`, as integers.
fn image_table(f: &AdditivePaFunction) -> Result<Vec<usize>> {
    (0..1u64 << f.n())
        .map(|a| {
            f.apply(&BitVector::from_u64(a, f.n()))
                .map(|k| index_of(&k))
        })
        .collect()
}

/// Every `(m′, m, weight)` of the delayed-scenario message law.
fn message_law(f: &AdditivePaFunction, law: MessageLaw) -> Result<Vec<(usize, usize, f64)>> {
    let (n, n_pa) = (f.n(), f.n_pa());
    match law {
        MessageLaw::Uniform => {
            let w = 1.0 / (1u64 << n) as f64;
            Ok(image_table(f)?
                .into_iter()
                .enumerate()
                .map(|(m, mp)| (mp, m, w))
                .collect())
        }
        MessageLaw::Preimage => {
            let red = f.reduction();
            let free = red.free_cols().len();
            let w = 1.0 / (1u64 << n_pa) as f64 / (1u64 << free) as f64;
            let mut out = Vec::with_capacity(1 << n);
            for mp in 0..1u64 << n_pa {
                let y = BitVector::from_u64(mp, n_pa);
                for v in 0..1u64 << free {
                    let m = red
                        .solve_with_free(&y, &BitVector::from_u64(v, free))?
                        .ok_or(Error::RowsNotIndependent {
                            rank: red.rank(),
                            rows: n_pa,
                        })?;
                    out.push((mp as usize, index_of(&m), w));
                }
            }
            Ok(out)
        }
    }
}

fn check_classical(f: &AdditivePaFunction, n_eve: usize) -> Result<()> {
    if f.n() > MAX_CLASSICAL_N {
        return Err(Error::TooLarge(format!(
            "N = {} > {MAX_CLASSICAL_N}",
            f.n()
        )));
    }
    if n_eve != f.n() {
        return Err(Error::DimensionMismatch {
            context: "eve model key length",
            expected: f.n(),
            found: n_eve,
        });
    }
    Ok(())
}

/// `(ε_key, ε_msg)` against a classical adversary.
pub fn theorem1_verify(
    f: &AdditivePaFunction,
    eve: &EveModel,
    prior: &Prior,
) -> Result<Theorem1Outcome> {
    theorem1_verify_with(f, eve, prior, MessageLaw::Preimage)
}

pub fn theorem1_verify_with(
    f: &AdditivePaFunction,
    eve: &EveModel,
    prior: &Prior,
    law: MessageLaw,
) -> Result<Theorem1Outcome> {
    let joints = delayed_joints(f, eve, prior, law)?;
    Ok(Theorem1Outcome {
        key: report(
            f,
            Scenario::NormalPa,
            classical_epsilon(&joints.0),
            eve.name(),
        ),
        msg: report(
            f,
            Scenario::DelayedPa,
            classical_epsilon(&joints.1),
            eve.name(),
        ),
    })
}

/// The normal joint `p(f(a), e)` and the delayed joint `p(m′, (e, a⊕m))`.
/// Delayed views are indexed `e · 2^N + c`.
pub fn delayed_joints(
    f: &AdditivePaFunction,
    eve: &EveModel,
    prior: &Prior,
    law: MessageLaw,
) -> Result<(ClassicalJoint, ClassicalJoint)> {
    check_classical(f, eve.n())?;
    let space = 1usize << f.n();
    let keys = 1usize << f.n_pa();
    let outcomes = eve.outcomes();
    let pa = prior.weights(f.n())?;
    let image = image_table(f)?;

    let mut normal = vec![0.0; keys * outcomes];
    for a in 0..space {
        for (e, pe) in eve.row(a).iter().enumerate() {
            normal[image[a] * outcomes + e] += pa[a] * pe;
        }
    }

    let views = outcomes * space;
    let mut delayed = vec![0.0; keys * views];
    for (mp, m, w) in message_law(f, law)? {
        for a in 0..space {
            let c = a ^ m;
            for (e, pe) in eve.row(a).iter().enumerate() {
                delayed[mp * views + e * space + c] += w * pa[a] * pe;
            }
        }
    }
    Ok((
        ClassicalJoint::new(keys, outcomes, normal)?,
        ClassicalJoint::new(keys, views, delayed)?,
    ))
}

/// `(ε_key, ε_msg)` against a quantum adversary holding `ρ_{E|a}`. In the
/// delayed scenario Eve holds `E` together with the classical `c = a⊕m`, so
/// her state is block diagonal in `c`.
pub fn theorem1_verify_quantum(
    f: &AdditivePaFunction,
    eve: &QuantumEveModel,
    prior: &Prior,
) -> Result<Theorem1Outcome> {
    if f.n() > MAX_QUANTUM_N {
        return Err(Error::TooLarge(format!("N = {} > {MAX_QUANTUM_N}", f.n())));
    }
    if eve.dim() > MAX_EVE_DIM {
        return Err(Error::TooLarge(format!(
            "eve dimension {} > {MAX_EVE_DIM}",
            eve.dim()
        )));
    }
    if eve.n() != f.n() {
        return Err(Error::DimensionMismatch {
            context: "eve model key length",
            expected: f.n(),
            found: eve.n(),
        });
    }
    let space = 1usize << f.n();
    let keys = 1usize << f.n_pa();
    let d = eve.dim();
    let pa = prior.weights(f.n())?;
    let image = image_table(f)?;

    let mut normal = vec![DMatrix::<C64>::zeros(d, d); keys];
    for a in 0..space {
        normal[image[a]] += eve.state(a) * C64::new(pa[a], 0.0);
    }

    let mut delayed = vec![DMatrix::<C64>::zeros(d * space, d * space); keys];
    for (mp, m, w) in message_law(f, MessageLaw::Preimage)? {
        for a in 0..space {
            let c = a ^ m;
            let mut block = delayed[mp].view_mut((c * d, c * d), (d, d));
            block += eve.state(a) * C64::new(w * pa[a], 0.0);
        }
    }

    let eps_key = cq_epsilon(&CqJoint::from_blocks(normal)?);
    let eps_msg = cq_epsilon(&CqJoint::from_blocks(delayed)?);
    Ok(Theorem1Outcome {
        key: report(f, Scenario::NormalPa, eps_key, eve.name()),
        msg: report(f, Scenario::DelayedPa, eps_msg, eve.name()),
    })
}

/// Every `n_pa × n` matrix with independent rows, in lexicographic order of
/// the row-major entry bits.
pub fn full_rank_functions(n_pa: usize, n: usize) -> Result<Vec<AdditivePaFunction>> {
    if n_pa == 0 || n_pa > n {
        return Err(Error::InvalidPaShape { n_pa, n });
    }
    let entries = n_pa * n;
    if entries > MAX_ENUMERATED_ENTRIES {
        return Err(Error::TooLarge(format!("{n_pa}×{n} matrices")));
    }
    let candidates = par::map_range(1usize << entries, |bits| {
        let mut a = BinaryMatrix::zeros(n_pa, n);
        for i in 0..n_pa {
            for j in 0..n {
                a.set(i, j, (bits >> (i * n + j)) & 1 == 1);
            }
        }
        a.has_independent_rows().then_some(a)
    });
    candidates
        .into_iter()
        .flatten()
        .map(AdditivePaFunction::new)
        .collect()
}

/// Run the classical verifier over every full-rank `f` and every model.
pub fn theorem1_sweep(
    n_pa: usize,
    n: usize,
    models: &[EveModel],
    prior: &Prior,
) -> Result<Theorem1Sweep> {
    let functions = full_rank_functions(n_pa, n)?;
    let pairs: Vec<(usize, usize)> = (0..functions.len())
        .flat_map(|i| (0..models.len()).map(move |j| (i, j)))
        .collect();
    let outcomes = par::map_slice(&pairs, |&(i, j)| {
        theorem1_verify(&functions[i], &models[j], prior)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Theorem1Sweep::collect(
        functions.len(),
        models.len(),
        outcomes,
    ))
}

/// Run the quantum verifier over every full-rank `f` and every model.
pub fn theorem1_sweep_quantum(
    n_pa: usize,
    n: usize,
    models: &[QuantumEveModel],
    prior: &Prior,
) -> Result<Theorem1Sweep> {
    let functions = full_rank_functions(n_pa, n)?;
    let pairs: Vec<(usize, usize)> = (0..functions.len())
        .flat_map(|i| (0..models.len()).map(move |j| (i, j)))
        .collect();
    let outcomes = par::map_slice(&pairs, |&(i, j)| {
        theorem1_verify_quantum(&functions[i], &models[j], prior)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Theorem1Sweep::collect(
        functions.len(),
        models.len(),
        outcomes,
    ))
}
