use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::ValueEnum;
use dpa_core::gf2::{BinaryMatrix, BitVector};
use dpa_core::pa::AdditivePaFunction;
use dpa_core::protocol::table1_round_trips;
use dpa_core::quantum::{equivalence_trials, Basis, EquivalenceTrials, Pauli};
use dpa_core::security::{
    default_bank, parse_bank, theorem1_sweep, theorem1_sweep_quantum, Prior, QuantumEveModel,
    Theorem1Sweep,
};
use dpa_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::exit::{Failure, Outcome, SUCCESS, VERIFY_FAILED};
use crate::io;

/// `|ε_key − ε_msg|` bound against classical adversaries.
pub const CLASSICAL_TOLERANCE: f64 = 1e-12;
/// `|ε_key − ε_msg|` bound against quantum adversaries.
pub const QUANTUM_TOLERANCE: f64 = 1e-9;
/// Frobenius bound between the measured and depolarized backward-line states.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-10;
/// Frobenius bound between the two Pauli encoding orders.
pub const ORDER_TOLERANCE: f64 = 1e-12;

const MAX_ABAR_DIM: usize = 64;
const MAX_TRIALS: usize = 100_000;
const MAX_UNIFORMITY_N: usize = 20;
const MAX_DRAWS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Normal vs delayed PA security, exhaustively over all full-rank f.
    DelayedPa,
    /// Measured vs depolarized backward-line states on random inputs.
    #[value(name = "protocol-2c2d")]
    Protocol2c2d,
    /// Key-bit decoding table against single-signal round trips.
    Table1,
    /// Chi-square test of the preimage sampler.
    PreimageUniformity,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::DelayedPa => "delayed-pa",
            Suite::Protocol2c2d => "protocol-2c2d",
            Suite::Table1 => "table1",
            Suite::PreimageUniformity => "preimage-uniformity",
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Key length N (delayed-pa, preimage-uniformity).
    #[arg(long)]
    n: Option<usize>,
    /// Output length N_PA (delayed-pa, preimage-uniformity).
    #[arg(long)]
    npa: Option<usize>,
    /// JSON bank of classical adversaries (delayed-pa); built-in bank otherwise.
    #[arg(long)]
    bank: Option<PathBuf>,
    /// Raw-key law: uniform or random:SEED (delayed-pa).
    #[arg(long, default_value = "uniform")]
    prior: Prior,
    /// Random quantum adversaries to check as well (delayed-pa).
    #[arg(long, default_value_t = 0)]
    quantum_models: usize,
    /// Dimension of each quantum adversary (delayed-pa).
    #[arg(long, default_value_t = 2)]
    eve_dim: usize,
    /// Random input states (protocol-2c2d).
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Largest dimension of Alice's purifying system (protocol-2c2d).
    #[arg(long, default_value_t = 8)]
    abar_dim: usize,
    /// Sampler draws (preimage-uniformity).
    #[arg(long, default_value_t = 32_000)]
    draws: usize,
    /// Significance level (preimage-uniformity).
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    /// Seed of the random instances; drawn fresh (and printed) when absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// One bounded quantity: passes when `value <= bound`.
#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    bound: f64,
    pass: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            name,
            value,
            bound,
            pass: value <= bound,
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    suite: &'static str,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    checks: Vec<Check>,
    details: serde_json::Value,
}

pub fn run(args: Args) -> Outcome {
    let (seed, checks, details) = match args.suite {
        Suite::DelayedPa => delayed_pa(&args)?,
        Suite::Protocol2c2d => protocol_2c2d(&args)?,
        Suite::Table1 => table1(),
        Suite::PreimageUniformity => preimage_uniformity(&args)?,
    };
    let report = VerifyReport {
        suite: args.suite.name(),
        pass: checks.iter().all(|c| c.pass),
        seed,
        checks,
        details,
    };
    io::emit_json(&report, args.out.as_deref())?;
    Ok(if report.pass { SUCCESS } else { VERIFY_FAILED })
}

type SuiteResult = Result<(Option<u64>, Vec<Check>, serde_json::Value), Failure>;

fn to_value<T: Serialize>(value: &T) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(value).map_err(|e| Failure::config(format!("serializing: {e}")))
}

#[derive(Debug, Serialize)]
struct DelayedPaDetails<'a> {
    n: usize,
    n_pa: usize,
    prior: &'a Prior,
    classical_models: Vec<&'a str>,
    classical: &'a Theorem1Sweep,
    quantum: Option<QuantumDetails<'a>>,
}

#[derive(Debug, Serialize)]
struct QuantumDetails<'a> {
    eve_dim: usize,
    sweep: &'a Theorem1Sweep,
}

fn delayed_pa(args: &Args) -> SuiteResult {
    let (n, n_pa) = (args.n.unwrap_or(4), args.npa.unwrap_or(2));
    let bank = match &args.bank {
        Some(path) => parse_bank(&io::read(path)?)?,
        None => default_bank(),
    };
    let models = bank
        .iter()
        .map(|m| m.build(n))
        .collect::<Result<Vec<_>, Error>>()?;
    let classical = theorem1_sweep(n_pa, n, &models, &args.prior)?;
    let mut checks = vec![Check::new(
        "classical max |eps_key - eps_msg|",
        classical.max_deviation,
        CLASSICAL_TOLERANCE,
    )];

    let mut seed = None;
    let quantum = if args.quantum_models > 0 {
        let s = io::resolve_seed(args.seed);
        seed = Some(s);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let models = (0..args.quantum_models)
            .map(|i| QuantumEveModel::random(&format!("random-{i}"), n, args.eve_dim, &mut rng))
            .collect::<Result<Vec<_>, Error>>()?;
        let sweep = theorem1_sweep_quantum(n_pa, n, &models, &args.prior)?;
        checks.push(Check::new(
            "quantum max |eps_key - eps_msg|",
            sweep.max_deviation,
            QUANTUM_TOLERANCE,
        ));
        Some(sweep)
    } else {
        None
    };

    let details = to_value(&DelayedPaDetails {
        n,
        n_pa,
        prior: &args.prior,
        classical_models: bank.iter().map(|m| m.name.as_str()).collect(),
        classical: &classical,
        quantum: quantum.as_ref().map(|sweep| QuantumDetails {
            eve_dim: args.eve_dim,
            sweep,
        }),
    })?;
    Ok((seed, checks, details))
}

fn protocol_2c2d(args: &Args) -> SuiteResult {
    if args.abar_dim == 0 || args.abar_dim > MAX_ABAR_DIM {
        return Err(Failure::config(format!(
            "--abar-dim must be in 1..={MAX_ABAR_DIM}"
        )));
    }
    if args.trials == 0 || args.trials > MAX_TRIALS {
        return Err(Failure::config(format!(
            "--trials must be in 1..={MAX_TRIALS}"
        )));
    }
    let seed = io::resolve_seed(args.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r: EquivalenceTrials = equivalence_trials(args.trials, args.abar_dim, &mut rng)?;
    let checks = vec![
        Check::new("max delta (w = z)", r.max_delta_z, EQUIVALENCE_TOLERANCE),
        Check::new("max delta (w = x)", r.max_delta_x, EQUIVALENCE_TOLERANCE),
        Check::new("max encoding-order swap", r.max_order_swap, ORDER_TOLERANCE),
    ];
    Ok((Some(seed), checks, to_value(&r)?))
}

#[derive(Debug, Serialize)]
struct Table1Row {
    basis: Basis,
    op: Pauli,
    key_bit: bool,
    /// Round trips (one per prepared bit) that reproduced `key_bit`.
    matched: usize,
    trials: usize,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct Table1Details {
    cases: usize,
    passed: usize,
    rows: Vec<Table1Row>,
}

fn table1() -> (Option<u64>, Vec<Check>, serde_json::Value) {
    let mut grouped: BTreeMap<(u8, u8), Table1Row> = BTreeMap::new();
    for case in table1_round_trips() {
        let key = (case.basis as u8, case.op as u8);
        let row = grouped.entry(key).or_insert(Table1Row {
            basis: case.basis,
            op: case.op,
            key_bit: case.table_bit,
            matched: 0,
            trials: 0,
            pass: true,
        });
        row.trials += 1;
        row.matched += usize::from(case.passed());
        row.pass &= case.passed();
    }
    let rows: Vec<Table1Row> = grouped.into_values().collect();
    let passed = rows.iter().filter(|r| r.pass).count();
    let checks = vec![Check::new(
        "mismatched cases",
        (rows.len() - passed) as f64,
        0.0,
    )];
    let details = Table1Details {
        cases: rows.len(),
        passed,
        rows,
    };
    (
        None,
        checks,
        serde_json::to_value(&details).expect("table serializes"),
    )
}

#[derive(Debug, Serialize)]
struct UniformityDetails {
    n: usize,
    n_pa: usize,
    draws: usize,
    matrix: String,
    target: BitVector,
    support: usize,
    min_count: usize,
    max_count: usize,
    statistic: f64,
    degrees_of_freedom: usize,
    alpha: f64,
    critical: f64,
}

fn as_index(x: &BitVector) -> usize {
    x.iter()
        .enumerate()
        .fold(0, |acc, (j, b)| acc | (usize::from(b) << j))
}

fn preimage_uniformity(args: &Args) -> SuiteResult {
    let (n, n_pa) = (args.n.unwrap_or(8), args.npa.unwrap_or(3));
    if n == 0 || n > MAX_UNIFORMITY_N {
        return Err(Failure::config(format!(
            "--n must be in 1..={MAX_UNIFORMITY_N}"
        )));
    }
    if n_pa == 0 || n_pa >= n {
        return Err(Failure::config("--npa must be in 1..n"));
    }
    if args.draws == 0 || args.draws > MAX_DRAWS {
        return Err(Failure::config(format!(
            "--draws must be in 1..={MAX_DRAWS}"
        )));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::config("--alpha must be in (0, 1)"));
    }
    let seed = io::resolve_seed(args.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = loop {
        match AdditivePaFunction::with_reduction(BinaryMatrix::random(n_pa, n, &mut rng)) {
            Ok(f) => break f,
            Err(Error::RowsNotIndependent { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    };
    let y = BitVector::random(n_pa, &mut rng);

    // the preimage by enumeration, independent of the sampler
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for x in 0..1u64 << n {
        let v = BitVector::from_u64(x, n);
        if f.apply(&v)? == y {
            counts.insert(x as usize, 0);
        }
    }
    for _ in 0..args.draws {
        let x = f.sample_preimage(&y, &mut rng)?;
        match counts.get_mut(&as_index(&x)) {
            Some(c) => *c += 1,
            None => {
                return Err(Failure {
                    code: VERIFY_FAILED,
                    message: format!("sampled {x} outside the preimage of {y}"),
                })
            }
        }
    }
    let expected = args.draws as f64 / counts.len() as f64;
    let statistic: f64 = counts
        .values()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = counts.len() - 1;
    let critical = ChiSquared::new(dof as f64)
        .map_err(|e| Failure::config(format!("chi-square: {e}")))?
        .inverse_cdf(1.0 - args.alpha);
    let details = UniformityDetails {
        n,
        n_pa,
        draws: args.draws,
        matrix: f.matrix().to_text(),
        target: y,
        support: counts.len(),
        min_count: counts.values().copied().min().unwrap_or(0),
        max_count: counts.values().copied().max().unwrap_or(0),
        statistic,
        degrees_of_freedom: dof,
        alpha: args.alpha,
        critical,
    };
    let checks = vec![Check::new("chi-square statistic", statistic, critical)];
    Ok((Some(seed), checks, to_value(&details)?))
}
