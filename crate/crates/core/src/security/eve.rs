//! Adversary models for the exhaustive verifiers: conditional laws of Eve's
//! view given the raw key `a`, indexed by `a` read as an integer (bit `i` of
//! the integer is `a[i]`).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{c, DensityMatrix, C64};

const ROW_TOL: f64 = 1e-12;

/// How a classical model is specified in a bank file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EveSpec {
    /// Sees nothing.
    Blind,
    /// Sees `a[0]`.
    FirstBit,
    /// Sees `a[N-1]`.
    LastBit,
    /// Sees `a[index]`.
    Bit { index: usize },
    /// Sees the parity of `a`.
    Parity,
    /// Sees the Hamming weight of `a`.
    Weight,
    /// Sees `a` through a binary symmetric channel.
    NoisyCopy { flip: f64 },
    /// Sees `a`.
    Full,
    /// Each bit of `a` is independently erased with probability `prob`.
    Erasure { prob: f64 },
    /// A random stochastic matrix with `outcomes` columns.
    Random { outcomes: usize, seed: u64 },
    /// Explicit rows `P(e | a)`, one per value of `a`.
    Table { table: Vec<Vec<f64>> },
}

/// Named entry of a bank file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEve {
    pub name: String,
    #[serde(flatten)]
    pub spec: EveSpec,
}

impl NamedEve {
    pub fn new(name: &str, spec: EveSpec) -> Self {
        Self {
            name: name.to_string(),
            spec,
        }
    }

    pub fn build(&self, n: usize) -> Result<EveModel> {
        EveModel::from_spec(&self.name, &self.spec, n)
    }
}

/// The built-in bank.
pub fn default_bank() -> Vec<NamedEve> {
    vec![
        NamedEve::new("blind", EveSpec::Blind),
        NamedEve::new("first-bit", EveSpec::FirstBit),
        NamedEve::new("last-bit", EveSpec::LastBit),
        NamedEve::new("parity", EveSpec::Parity),
        NamedEve::new("weight", EveSpec::Weight),
        NamedEve::new("noisy-copy", EveSpec::NoisyCopy { flip: 0.1 }),
        NamedEve::new("full", EveSpec::Full),
        NamedEve::new(
            "random",
            EveSpec::Random {
                outcomes: 3,
                seed: 1,
            },
        ),
        NamedEve::new("erasure", EveSpec::Erasure { prob: 0.3 }),
    ]
}

pub fn parse_bank(json: &str) -> Result<Vec<NamedEve>> {
    serde_json::from_str(json).map_err(|e| Error::Parse(format!("eve bank: {e}")))
}

/// Conditional law `P(e | a)` over `2^N` raw keys.
#[derive(Debug, Clone, PartialEq)]
pub struct EveModel {
    name: String,
    n: usize,
    outcomes: usize,
    table: Vec<f64>,
}

fn probability(name: &'static str, p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::RateOutOfRange {
            name,
            value: p,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

impl EveModel {
    pub fn new(name: &str, n: usize, outcomes: usize, table: Vec<f64>) -> Result<Self> {
        let space = 1usize << n;
        if outcomes == 0 || table.len() != space * outcomes {
            return Err(Error::DimensionMismatch {
                context: "eve table",
                expected: space * outcomes.max(1),
                found: table.len(),
            });
        }
        for (a, row) in table.chunks(outcomes).enumerate() {
            if row.iter().any(|p| !(*p >= 0.0)) {
                return Err(Error::InvalidDistribution(format!(
                    "{name}: negative entry for a={a}"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "{name}: row a={a} sums to {s}"
                )));
            }
        }
        Ok(Self {
            name: name.to_string(),
            n,
            outcomes,
            table,
        })
    }

    /// Deterministic view `e = g(a)`.
    pub fn deterministic<G: Fn(u64) -> usize>(
        name: &str,
        n: usize,
        outcomes: usize,
        g: G,
    ) -> Result<Self> {
        let mut table = vec![0.0; (1usize << n) * outcomes];
        for a in 0..1u64 << n {
            let e = g(a);
            if e >= outcomes {
                return Err(Error::InvalidDistribution(format!(
                    "{name}: view {e} ≥ {outcomes}"
                )));
            }
            table[a as usize * outcomes + e] = 1.0;
        }
        Self::new(name, n, outcomes, table)
    }

    pub fn from_spec(name: &str, spec: &EveSpec, n: usize) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::TooLarge(format!("eve model over {n} key bits")));
        }
        let bit = |a: u64, i: usize| ((a >> i) & 1) as usize;
        match spec {
            EveSpec::Blind => Self::deterministic(name, n, 1, |_| 0),
            EveSpec::FirstBit => Self::deterministic(name, n, 2, |a| bit(a, 0)),
            EveSpec::LastBit => Self::deterministic(name, n, 2, |a| bit(a, n - 1)),
            EveSpec::Bit { index } => {
                if *index >= n {
                    return Err(Error::Config(format!(
                        "{name}: bit {index} of a {n}-bit key"
                    )));
                }
                Self::deterministic(name, n, 2, |a| bit(a, *index))
            }
            EveSpec::Parity => Self::deterministic(name, n, 2, |a| (a.count_ones() & 1) as usize),
            EveSpec::Weight => Self::deterministic(name, n, n + 1, |a| a.count_ones() as usize),
            EveSpec::Full => Self::deterministic(name, n, 1 << n, |a| a as usize),
            EveSpec::NoisyCopy { flip } => {
                let q = probability("flip", *flip)?;
                let space = 1usize << n;
                let mut table = Vec::with_capacity(space * space);
                for a in 0..space {
                    for e in 0..space {
                        let d = (a ^ e).count_ones() as i32;
                        table.push(q.powi(d) * (1.0 - q).powi(n as i32 - d));
                    }
                }
                Self::new(name, n, space, table)
            }
            EveSpec::Erasure { prob } => {
                let q = probability("erasure", *prob)?;
                let outcomes = 3usize.pow(n as u32);
                let mut table = vec![0.0; (1usize << n) * outcomes];
                for a in 0..1u64 << n {
                    // base-3 digit i: a[i] if kept, 2 if erased
                    for mask in 0..1u64 << n {
                        let mut e = 0usize;
                        for i in (0..n).rev() {
                            let digit = if (mask >> i) & 1 == 1 { 2 } else { bit(a, i) };
                            e = e * 3 + digit;
                        }
                        let erased = mask.count_ones() as i32;
                        table[a as usize * outcomes + e] +=
                            q.powi(erased) * (1.0 - q).powi(n as i32 - erased);
                    }
                }
                Self::new(name, n, outcomes, table)
            }
            EveSpec::Random { outcomes, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Self::random(name, n, *outcomes, &mut rng)
            }
            EveSpec::Table { table } => {
                let outcomes = table.first().map_or(0, Vec::len);
                if table.len() != 1 << n || table.iter().any(|r| r.len() != outcomes) {
                    return Err(Error::Config(format!(
                        "{name}: table must have {} rows of equal length",
                        1usize << n
                    )));
                }
                Self::new(name, n, outcomes, table.concat())
            }
        }
    }

    pub fn random<R: Rng + ?Sized>(
        name: &str,
        n: usize,
        outcomes: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if outcomes == 0 {
            return Err(Error::Config(format!("{name}: zero outcomes")));
        }
        let mut table = Vec::with_capacity((1usize << n) * outcomes);
        for _ in 0..1usize << n {
            let row: Vec<f64> = (0..outcomes).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = row.iter().sum();
            table.extend(row.into_iter().map(|p| p / s));
        }
        Self::new(name, n, outcomes, table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn p(&self, e: usize, a: usize) -> f64 {
        self.table[a * self.outcomes + e]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.table[a * self.outcomes..(a + 1) * self.outcomes]
    }
}

/// Law of the raw key `a`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Prior {
    #[default]
    Uniform,
    Random {
        seed: u64,
    },
    Table {
        weights: Vec<f64>,
    },
}

impl Prior {
    pub fn weights(&self, n: usize) -> Result<Vec<f64>> {
        let space = 1usize << n;
        let w = match self {
            Prior::Uniform => vec![1.0 / space as f64; space],
            Prior::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let raw: Vec<f64> = (0..space).map(|_| rng.random::<f64>() + 1e-3).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|p| p / s).collect()
            }
            Prior::Table { weights } => {
                if weights.len() != space {
                    return Err(Error::DimensionMismatch {
                        context: "prior",
                        expected: space,
                        found: weights.len(),
                    });
                }
                weights.clone()
            }
        };
        let s: f64 = w.iter().sum();
        if w.iter().any(|p| !(*p >= 0.0)) || (s - 1.0).abs() > ROW_TOL {
            return Err(Error::InvalidDistribution(format!("prior sums to {s}")));
        }
        Ok(w)
    }
}

impl std::str::FromStr for Prior {
    type Err = Error;

    /// `uniform` or `random:SEED`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "uniform" => Ok(Prior::Uniform),
            Some(("random", seed)) => seed
                .parse()
                .map(|seed| Prior::Random { seed })
                .map_err(|e| Error::Parse(format!("prior seed `{seed}`: {e}"))),
            _ => Err(Error::Parse(format!("unknown prior `{s}`"))),
        }
    }
}

/// Quantum adversary: a state `ρ_{E|a}` per raw key.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumEveModel {
    name: String,
    n: usize,
    states: Vec<DMatrix<C64>>,
}

impl QuantumEveModel {
    pub fn new(name: &str, n: usize, states: Vec<DMatrix<C64>>) -> Result<Self> {
        if states.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                context: "quantum eve states",
                expected: 1 << n,
                found: states.len(),
            });
        }
        let dim = states[0].nrows();
        for s in &states {
            let labels = ["E"];
            DensityMatrix::new(s.clone(), &[dim], &labels)?;
        }
        Ok(Self {
            name: name.to_string(),
            n,
            states,
        })
    }

    pub fn random<R: Rng + ?Sized>(name: &str, n: usize, dim: usize, rng: &mut R) -> Result<Self> {
        let states = (0..1usize << n)
            .map(|_| DensityMatrix::random(&[dim], &["E"], rng).map(|d| d.entries().clone()))
            .collect::<Result<_>>()?;
        Self::new(name, n, states)
    }

    /// Diagonal embedding of a classical model.
    pub fn from_classical(model: &EveModel) -> Result<Self> {
        let d = model.outcomes();
        let states = (0..1usize << model.n())
            .map(|a| {
                DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    d,
                    model.row(a).iter().map(|&p| c(p, 0.0)),
                ))
            })
            .collect();
        Self::new(model.name(), model.n(), states)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.states[0].nrows()
    }

    pub fn state(&self, a: usize) -> &DMatrix<C64> {
        &self.states[a]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bank_builds_for_small_keys() {
        for n in 1..=4 {
            for eve in default_bank() {
                let m = eve.build(n).unwrap();
                assert_eq!(m.n(), n);
            }
        }
    }

    #[test]
    fn erasure_rows_sum_to_one() {
        let m = EveModel::from_spec("e", &EveSpec::Erasure { prob: 0.25 }, 3).unwrap();
        assert_eq!(m.outcomes(), 27);
        // a = 0b101 fully visible: digits (a0, a1, a2) = (1, 0, 1) → 1·9 + 0·3 + 1
        assert!((m.p(10, 0b101) - 0.75f64.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn bank_round_trips_through_json() {
        let bank = default_bank();
        let json = serde_json::to_string(&bank).unwrap();
        assert!(json.contains("\"kind\":\"noisy-copy\""));
        assert_eq!(parse_bank(&json).unwrap(), bank);
        let custom = r#"[{"name":"t","kind":"table","table":[[1,0],[0,1]]}]"#;
        let m = parse_bank(custom).unwrap()[0].build(1).unwrap();
        assert_eq!(m.p(1, 1), 1.0);
        assert!(parse_bank(r#"[{"name":"t","kind":"psychic"}]"#).is_err());
    }

    #[test]
    fn priors() {
        assert_eq!(
            "uniform".parse::<Prior>().unwrap().weights(2).unwrap(),
            vec![0.25; 4]
        );
        let w = "random:3".parse::<Prior>().unwrap().weights(3).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!("bogus".parse::<Prior>().is_err());
        assert!(Prior::Table { weights: vec![1.0] }.weights(1).is_err());
    }

    #[test]
    fn classical_embedding_is_diagonal() {
        let m = EveModel::from_spec("p", &EveSpec::Parity, 2).unwrap();
        let q = QuantumEveModel::from_classical(&m).unwrap();
        assert_eq!(q.dim(), 2);
        assert_eq!(q.state(0b11)[(0, 0)], c(1.0, 0.0));
        assert_eq!(q.state(0b01)[(1, 1)], c(1.0, 0.0));
    }
}
