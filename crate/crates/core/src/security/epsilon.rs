use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::quantum::{hermitian_eigenvalues, trace_norm, C64, CONSTRUCTION_TOL, PSD_TOL};

const SUM_TOL: f64 = 1e-12;

/// Joint law `p(k, e)` of a key and a classical adversary view, stored
/// row-major by key value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalJoint {
    keys: usize,
    views: usize,
    table: Vec<f64>,
}

impl ClassicalJoint {
    pub fn new(keys: usize, views: usize, table: Vec<f64>) -> Result<Self> {
        if keys == 0 || views == 0 {
            return Err(Error::InvalidDistribution("empty key or view space".into()));
        }
        if table.len() != keys * views {
            return Err(Error::DimensionMismatch {
                context: "joint table",
                expected: keys * views,
                found: table.len(),
            });
        }
        if let Some(p) = table.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "negative or NaN entry {p}"
            )));
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        Ok(Self { keys, views, table })
    }

    /// Build from rows `p(k, ·)`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let views = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != views) {
            return Err(Error::InvalidDistribution("ragged joint table".into()));
        }
        Self::new(rows.len(), views, rows.concat())
    }

    pub fn keys(&self) -> usize {
        self.keys
    }

    pub fn views(&self) -> usize {
        self.views
    }

    pub fn p(&self, k: usize, e: usize) -> f64 {
        self.table[k * self.views + e]
    }

    pub fn view_marginal(&self) -> Vec<f64> {
        (0..self.views)
            .map(|e| (0..self.keys).map(|k| self.p(k, e)).sum())
            .collect()
    }

    pub fn key_marginal(&self) -> Vec<f64> {
        self.table
            .chunks(self.views)
            .map(|r| r.iter().sum())
            .collect()
    }

    /// Process the view through a deterministic map `e ↦ g(e) < views`.
    pub fn map_views<G: Fn(usize) -> usize>(&self, views: usize, g: G) -> Result<Self> {
        let mut table = vec![0.0; self.keys * views];
        for k in 0..self.keys {
            for e in 0..self.views {
                let t = g(e);
                if t >= views {
                    return Err(Error::InvalidDistribution(format!(
                        "view {e} maps to {t} ≥ {views}"
                    )));
                }
                table[k * views + t] += self.p(k, e);
            }
        }
        Self::new(self.keys, views, table)
    }

    /// Append a view component drawn from `extra`, independent of everything.
    pub fn append_independent(&self, extra: &[f64]) -> Result<Self> {
        let views = self.views * extra.len();
        let mut table = Vec::with_capacity(self.keys * views);
        for k in 0..self.keys {
            for e in 0..self.views {
                table.extend(extra.iter().map(|q| self.p(k, e) * q));
            }
        }
        Self::new(self.keys, views, table)
    }
}

/// `½ Σ_{k,e} |p(k,e) − p(e)/|K||`: trace distance to a uniform key that is
/// independent of the view.
pub fn classical_epsilon(j: &ClassicalJoint) -> f64 {
    let marginal = j.view_marginal();
    let inv_k = 1.0 / j.keys as f64;
    let mut sum = 0.0;
    for k in 0..j.keys {
        for (e, pe) in marginal.iter().enumerate() {
            sum += (j.p(k, e) - pe * inv_k).abs();
        }
    }
    0.5 * sum
}

/// A classical key with a quantum adversary: `ρ_KE = Σ_k |k⟩⟨k| ⊗ ω_k` with
/// subnormalized blocks `ω_k = P_K(k) ρ_{E|k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CqJoint {
    probabilities: Vec<f64>,
    blocks: Vec<DMatrix<C64>>,
}

fn check_square(m: &DMatrix<C64>, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            context: "adversary state",
            expected: dim,
            found: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

fn check_density(rho: &DMatrix<C64>) -> Result<()> {
    let herm = (rho - rho.adjoint()).norm();
    if herm > CONSTRUCTION_TOL {
        return Err(Error::InvalidState(format!(
            "not Hermitian (error {herm:e})"
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > CONSTRUCTION_TOL || tr.im.abs() > CONSTRUCTION_TOL {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let min = hermitian_eigenvalues(rho).first().copied().unwrap_or(0.0);
    if min < PSD_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

impl CqJoint {
    /// From `P_K` and the conditional states `ρ_{E|k}`.
    pub fn from_conditionals(p_k: &[f64], states: &[DMatrix<C64>]) -> Result<Self> {
        if p_k.len() != states.len() || p_k.is_empty() {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities for {} states",
                p_k.len(),
                states.len()
            )));
        }
        if let Some(p) = p_k.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "negative or NaN probability {p}"
            )));
        }
        let total: f64 = p_k.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        let dim = states[0].nrows();
        for s in states {
            check_square(s, dim)?;
            check_density(s)?;
        }
        let blocks = p_k
            .iter()
            .zip(states)
            .map(|(&p, s)| s * C64::new(p, 0.0))
            .collect();
        Ok(Self {
            probabilities: p_k.to_vec(),
            blocks,
        })
    }

    /// From subnormalized blocks `ω_k`; `Σ_k ω_k` must be a density matrix.
    pub fn from_blocks(blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::InvalidDistribution("no key values".into()))?;
        let dim = first.nrows();
        let mut total = DMatrix::<C64>::zeros(dim, dim);
        let mut probabilities = Vec::with_capacity(blocks.len());
        for b in &blocks {
            check_square(b, dim)?;
            let min = hermitian_eigenvalues(b).first().copied().unwrap_or(0.0);
            if min < PSD_TOL {
                return Err(Error::InvalidState(format!(
                    "block has negative eigenvalue {min:e}"
                )));
            }
            probabilities.push(b.trace().re);
            total += b;
        }
        check_density(&total)?;
        Ok(Self {
            probabilities,
            blocks,
        })
    }

    pub fn keys(&self) -> usize {
        self.blocks.len()
    }

    pub fn eve_dim(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    /// `ρ_E = Σ_k ω_k`.
    pub fn eve_state(&self) -> DMatrix<C64> {
        self.blocks
            .iter()
            .skip(1)
            .fold(self.blocks[0].clone(), |acc, b| acc + b)
    }
}

/// `½ Tr|ρ_KE − ρ_U ⊗ ρ_E|`. The difference is block diagonal in the key, so
/// the trace norm is the sum of the per-block trace norms.
pub fn cq_epsilon(j: &CqJoint) -> f64 {
    let share = j.eve_state() * C64::new(1.0 / j.keys() as f64, 0.0);
    let norms = par::map_slice(j.blocks(), |b| trace_norm(&(b - &share)));
    0.5 * norms.iter().sum::<f64>()
}
