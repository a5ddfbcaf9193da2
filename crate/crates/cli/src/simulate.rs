use std::path::PathBuf;

use clap::ValueEnum;
use dpa_core::protocol::sim::stream;
use dpa_core::protocol::{
    check_signal_equivalence, simulate_report, stream_rng, ChannelModel, EveModel, PaChoice,
    ProtocolKind, RelayScheme, Report, Sifting, SignalEquivalence, SimConfig,
};
use dpa_core::quantum::Basis;
use serde::Serialize;

use crate::exit::{Failure, Outcome, ABORT, SUCCESS, VERIFY_FAILED};
use crate::io;

const DEFAULT_N: usize = 10_000;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SiftingArg {
    Memory,
    Sifted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BasisArg {
    Z,
    X,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RelaySchemeArg {
    Delayed,
    Normal,
}

/// Flags mapped onto the simulation config document. Each flag overrides
/// the matching field of `--config`.
#[derive(Debug, Clone, clap::Args)]
pub struct ConfigArgs {
    /// JSON config document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Raw key length N (default 10000 without a config).
    #[arg(long)]
    n: Option<usize>,
    /// Check-mode test signals.
    #[arg(long)]
    n_test: Option<usize>,
    /// Key bits disclosed for the round-trip error test.
    #[arg(long)]
    n_key_test: Option<usize>,
    /// Probability that a check signal is measured in z.
    #[arg(long)]
    check_fraction: Option<f64>,
    /// Forward-line noise: noiseless, bsc:E or depolarizing:P.
    #[arg(long)]
    noise_fwd: Option<ChannelModel>,
    /// Backward-line noise: noiseless, bsc:E or depolarizing:P.
    #[arg(long)]
    noise_bwd: Option<ChannelModel>,
    /// Eavesdropper: none or intercept-resend[:forward|backward|both].
    #[arg(long)]
    eve: Option<EveModel>,
    /// Seeds the Toeplitz draw independently of the run seed.
    #[arg(long)]
    pa_seed: Option<u64>,
    #[arg(long, value_enum)]
    sifting: Option<SiftingArg>,
    /// Bob prepares every key signal in this basis.
    #[arg(long, value_enum)]
    forced_basis: Option<BasisArg>,
    /// Fewer test bits than this in either basis aborts.
    #[arg(long)]
    min_check_per_basis: Option<usize>,
    /// Relay key pool size.
    #[arg(long)]
    pool: Option<usize>,
    #[arg(long, value_enum)]
    relay_scheme: Option<RelaySchemeArg>,
}

impl ConfigArgs {
    pub fn build(&self, protocol: Option<ProtocolKind>) -> Result<SimConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let mut cfg = SimConfig::from_json(&io::read(path)?)?;
                if let Some(p) = protocol {
                    cfg.protocol = p;
                }
                cfg
            }
            None => {
                let p = protocol
                    .ok_or_else(|| Failure::config("a protocol or --config is required"))?;
                SimConfig::new(p, DEFAULT_N)
            }
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if self.n_test.is_some() {
            cfg.n_test = self.n_test;
        }
        if self.n_key_test.is_some() {
            cfg.n_key_test = self.n_key_test;
        }
        if let Some(f) = self.check_fraction {
            cfg.check_fraction = f;
        }
        if let Some(c) = self.noise_fwd {
            cfg.channels.forward = c;
        }
        if let Some(c) = self.noise_bwd {
            cfg.channels.backward = c;
        }
        if let Some(e) = &self.eve {
            cfg.eve = e.clone();
        }
        if let Some(s) = self.pa_seed {
            cfg.pa = PaChoice::Seed(s);
        }
        if let Some(s) = self.sifting {
            cfg.sifting = match s {
                SiftingArg::Memory => Sifting::Memory,
                SiftingArg::Sifted => Sifting::Sifted,
            };
        }
        if let Some(b) = self.forced_basis {
            cfg.forced_basis = Some(match b {
                BasisArg::Z => Basis::Z,
                BasisArg::X => Basis::X,
            });
        }
        if let Some(m) = self.min_check_per_basis {
            cfg.min_check_per_basis = m;
        }
        if self.pool.is_some() {
            cfg.pool = self.pool;
        }
        if let Some(r) = self.relay_scheme {
            cfg.relay_scheme = match r {
                RelaySchemeArg::Delayed => RelayScheme::Delayed,
                RelaySchemeArg::Normal => RelayScheme::Normal,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// bb84, dqkd, integrated-2, integrated-2b, integrated-2c, integrated-2d or relay.
    protocol: Option<ProtocolKind>,
    #[command(flatten)]
    config: ConfigArgs,
    /// Run seed; drawn fresh (and printed) when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Report path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the per-signal transcript here.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Compare the measured and depolarized backward-line states on this
    /// many sampled code signals (integrated-2c/2d).
    #[arg(long, num_args = 0..=1, default_missing_value = "20")]
    check_equivalence: Option<usize>,
}

/// Signals whose Frobenius deviation exceeds this fail the check.
const EQUIVALENCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Serialize)]
struct EquivalenceCheck {
    #[serde(flatten)]
    result: SignalEquivalence,
    tolerance: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    #[serde(flatten)]
    report: Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    equivalence: Option<EquivalenceCheck>,
}

pub fn run(args: Args) -> Outcome {
    let mut cfg = args.config.build(args.protocol)?;
    cfg.seed = Some(io::resolve_seed(args.seed.or(cfg.seed)));
    let (report, transcript) = simulate_report(&cfg)?;

    let equivalence = match args.check_equivalence {
        Some(samples) => {
            if !matches!(
                cfg.protocol,
                ProtocolKind::Integrated2c | ProtocolKind::Integrated2d
            ) {
                return Err(Failure::config(
                    "--check-equivalence applies to integrated-2c and integrated-2d",
                ));
            }
            let mut rng = stream_rng(report.seed, stream::EQUIVALENCE);
            let result =
                check_signal_equivalence(&transcript, &cfg.channels.forward, samples, &mut rng)?;
            let pass = result.max() <= EQUIVALENCE_TOLERANCE;
            Some(EquivalenceCheck {
                result,
                tolerance: EQUIVALENCE_TOLERANCE,
                pass,
            })
        }
        None => None,
    };

    if let Some(path) = &args.transcript {
        io::emit_json(&transcript, Some(path))?;
    }
    let failed_check = equivalence.as_ref().is_some_and(|e| !e.pass);
    let abort = report.abort;
    io::emit_json(
        &SimulateReport {
            report,
            equivalence,
        },
        args.out.as_deref(),
    )?;
    Ok(if abort {
        ABORT
    } else if failed_check {
        VERIFY_FAILED
    } else {
        SUCCESS
    })
}
