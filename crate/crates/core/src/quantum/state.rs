use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{c, C64, CONSTRUCTION_TOL, PSD_TOL};
use crate::error::{Error, Result};

/// Ordered subsystem layout shared by pure and mixed states. The first
/// subsystem is the most significant digit of the flat index.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Layout {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl Layout {
    fn new(dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if dims.len() != labels.len() {
            return Err(Error::InvalidState(format!(
                "{} dims for {} labels",
                dims.len(),
                labels.len()
            )));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidState("zero-dimensional subsystem".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidState(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self { dims, labels })
    }

    fn total(&self) -> usize {
        self.dims.iter().product()
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    fn concat(parts: &[&Layout]) -> Result<Self> {
        let dims = parts.iter().flat_map(|l| l.dims.iter().copied()).collect();
        let labels = parts
            .iter()
            .flat_map(|l| l.labels.iter().cloned())
            .collect();
        Layout::new(dims, labels)
    }

    /// Embed a single-subsystem operator as `I ⊗ … ⊗ op ⊗ … ⊗ I`.
    fn embed(&self, op: &DMatrix<C64>, label: &str) -> Result<DMatrix<C64>> {
        let pos = self.position(label)?;
        let d = self.dims[pos];
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "local operator",
                expected: d,
                found: op.nrows(),
            });
        }
        let before: usize = self.dims[..pos].iter().product();
        let after: usize = self.dims[pos + 1..].iter().product();
        Ok(DMatrix::<C64>::identity(before, before)
            .kronecker(op)
            .kronecker(&DMatrix::<C64>::identity(after, after)))
    }
}

fn labels_of(labels: &[&str]) -> Vec<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

/// A normalized state vector on labelled subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<C64>,
    layout: Layout,
}

impl PureState {
    pub fn new(amplitudes: DVector<C64>, dims: &[usize], labels: &[&str]) -> Result<Self> {
        let layout = Layout::new(dims.to_vec(), labels_of(labels))?;
        if layout.total() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                context: "state vector length",
                expected: layout.total(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Rescales `amplitudes` to unit norm before building the state.
    pub fn normalized(amplitudes: DVector<C64>, dims: &[usize], labels: &[&str]) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amplitudes / c(norm, 0.0), dims, labels)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(index: usize, dims: &[usize], labels: &[&str]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::InvalidState(format!(
                "basis index {index} >= {total}"
            )));
        }
        let mut v = DVector::zeros(total);
        v[index] = c(1.0, 0.0);
        Self::new(v, dims, labels)
    }

    /// Haar-random state from normalized complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], labels: &[&str], rng: &mut R) -> Result<Self> {
        let total: usize = dims.iter().product();
        let v = DVector::from_fn(total, |_, _| {
            c(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            )
        });
        Self::normalized(v, dims, labels)
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.layout.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.layout.labels
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn tensor(parts: &[&PureState]) -> Result<Self> {
        let layout = Layout::concat(&parts.iter().map(|p| &p.layout).collect::<Vec<_>>())?;
        let amplitudes = parts.iter().skip(1).fold(
            parts.first().map_or_else(
                || DVector::from_element(1, c(1.0, 0.0)),
                |p| p.amplitudes.clone(),
            ),
            |acc, p| acc.kronecker(&p.amplitudes),
        );
        Ok(Self { amplitudes, layout })
    }

    pub fn apply_local(&self, op: &DMatrix<C64>, label: &str) -> Result<Self> {
        let full = self.layout.embed(op, label)?;
        let amplitudes = full * &self.amplitudes;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidState("local operator is not unitary".into()));
        }
        Ok(Self {
            amplitudes,
            layout: self.layout.clone(),
        })
    }

    /// `(⟨bra|_label ⊗ I) |ψ⟩` as a raw (unnormalized) vector on the
    /// remaining subsystems, together with their dims and labels.
    pub fn contract(
        &self,
        label: &str,
        bra: &[C64],
    ) -> Result<(DVector<C64>, Vec<usize>, Vec<String>)> {
        let pos = self.layout.position(label)?;
        let d = self.layout.dims[pos];
        if bra.len() != d {
            return Err(Error::DimensionMismatch {
                context: "contraction vector",
                expected: d,
                found: bra.len(),
            });
        }
        let before: usize = self.layout.dims[..pos].iter().product();
        let after: usize = self.layout.dims[pos + 1..].iter().product();
        let mut out = DVector::zeros(before * after);
        for b in 0..before {
            for k in 0..d {
                let w = bra[k].conj();
                for a in 0..after {
                    out[b * after + a] += w * self.amplitudes[(b * d + k) * after + a];
                }
            }
        }
        let mut dims = self.layout.dims.clone();
        let mut labels = self.layout.labels.clone();
        dims.remove(pos);
        labels.remove(pos);
        Ok((out, dims, labels))
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            entries: &self.amplitudes * self.amplitudes.adjoint(),
            layout: self.layout.clone(),
        }
    }
}

/// A density operator on labelled subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
    layout: Layout,
}

impl DensityMatrix {
    /// Wraps `entries` after checking shape, hermiticity, unit trace and
    /// positivity.
    pub fn new(entries: DMatrix<C64>, dims: &[usize], labels: &[&str]) -> Result<Self> {
        let rho = Self::from_parts(entries, dims, labels)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Shape-checked but otherwise unvalidated; used for intermediate sums.
    pub(crate) fn from_parts(
        entries: DMatrix<C64>,
        dims: &[usize],
        labels: &[&str],
    ) -> Result<Self> {
        let layout = Layout::new(dims.to_vec(), labels_of(labels))?;
        if entries.nrows() != layout.total() || entries.ncols() != layout.total() {
            return Err(Error::DimensionMismatch {
                context: "density matrix size",
                expected: layout.total(),
                found: entries.nrows(),
            });
        }
        Ok(Self { entries, layout })
    }

    pub fn maximally_mixed(dims: &[usize], labels: &[&str]) -> Result<Self> {
        let total: usize = dims.iter().product();
        let entries = DMatrix::<C64>::identity(total, total) / c(total as f64, 0.0);
        Self::new(entries, dims, labels)
    }

    /// Random mixed state `G G† / Tr(G G†)` with a square complex Gaussian
    /// `G`.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], labels: &[&str], rng: &mut R) -> Result<Self> {
        let total: usize = dims.iter().product();
        let g = DMatrix::from_fn(total, total, |_, _| {
            c(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            )
        });
        let gg = &g * g.adjoint();
        let tr = gg.trace();
        Self::new(gg / tr, dims, labels)
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dims(&self) -> &[usize] {
        &self.layout.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.layout.labels
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).norm()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (error {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - c(1.0, 0.0)).norm() > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn tensor(parts: &[&DensityMatrix]) -> Result<Self> {
        let layout = Layout::concat(&parts.iter().map(|p| &p.layout).collect::<Vec<_>>())?;
        let entries = parts.iter().skip(1).fold(
            parts.first().map_or_else(
                || DMatrix::from_element(1, 1, c(1.0, 0.0)),
                |p| p.entries.clone(),
            ),
            |acc, p| acc.kronecker(&p.entries),
        );
        Ok(Self { entries, layout })
    }

    /// Trace out every subsystem not named in `keep`. Kept subsystems retain
    /// their original relative order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        let mut kept_pos = keep
            .iter()
            .map(|l| self.layout.position(l))
            .collect::<Result<Vec<_>>>()?;
        kept_pos.sort_unstable();
        kept_pos.dedup();
        let traced_pos: Vec<usize> = (0..self.layout.dims.len())
            .filter(|p| !kept_pos.contains(p))
            .collect();

        let strides = self.layout.strides();
        let offsets = |positions: &[usize]| -> Vec<usize> {
            // flat offsets of every multi-index over `positions`
            let mut out = vec![0usize];
            for &p in positions {
                let mut next = Vec::with_capacity(out.len() * self.layout.dims[p]);
                for base in &out {
                    for k in 0..self.layout.dims[p] {
                        next.push(base + k * strides[p]);
                    }
                }
                out = next;
            }
            out
        };
        let kept_off = offsets(&kept_pos);
        let traced_off = offsets(&traced_pos);

        let n = kept_off.len();
        let mut out = DMatrix::zeros(n, n);
        for (i, &ri) in kept_off.iter().enumerate() {
            for (j, &cj) in kept_off.iter().enumerate() {
                let mut acc = c(0.0, 0.0);
                for &t in &traced_off {
                    acc += self.entries[(ri + t, cj + t)];
                }
                out[(i, j)] = acc;
            }
        }
        let dims: Vec<usize> = kept_pos.iter().map(|&p| self.layout.dims[p]).collect();
        let labels: Vec<String> = kept_pos
            .iter()
            .map(|&p| self.layout.labels[p].clone())
            .collect();
        Ok(Self {
            entries: out,
            layout: Layout::new(dims, labels)?,
        })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let pos = self.layout.position(from)?;
        let mut labels = self.layout.labels.clone();
        labels[pos] = to.to_string();
        Ok(Self {
            entries: self.entries.clone(),
            layout: Layout::new(self.layout.dims.clone(), labels)?,
        })
    }

    /// `U ρ U†` with `U` acting on one labelled subsystem.
    pub fn conjugate_local(&self, op: &DMatrix<C64>, label: &str) -> Result<Self> {
        let full = self.layout.embed(op, label)?;
        Ok(Self {
            entries: &full * &self.entries * full.adjoint(),
            layout: self.layout.clone(),
        })
    }

    /// Frobenius distance to a state with the same subsystem layout.
    pub fn distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.layout != other.layout {
            return Err(Error::InvalidState(format!(
                "layouts differ: {:?}{:?} vs {:?}{:?}",
                self.layout.labels, self.layout.dims, other.layout.labels, other.layout.dims
            )));
        }
        Ok(frobenius_distance(&self.entries, &other.entries))
    }
}

pub fn frobenius_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).norm()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `Tr|M| = Σ |λ_i|` for Hermitian `M`.
pub fn trace_norm(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).iter().map(|l| l.abs()).sum()
}
