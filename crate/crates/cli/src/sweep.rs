use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use dpa_core::protocol::{bsc_grid, sweep, ProtocolKind};

use crate::exit::{Failure, Outcome, SUCCESS};
use crate::io;
use crate::simulate::ConfigArgs;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Protocol of every run.
    protocol: Option<ProtocolKind>,
    #[command(flatten)]
    config: ConfigArgs,
    /// Forward-line bsc rates.
    #[arg(long, value_delimiter = ',', default_value = "0,0.02,0.05")]
    fwd: Vec<f64>,
    /// Backward-line bsc rates.
    #[arg(long, value_delimiter = ',', default_value = "0,0.02,0.05")]
    bwd: Vec<f64>,
    /// Runs per grid point.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Root seed; per-run seeds are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> Outcome {
    let base = args.config.build(args.protocol)?;
    let root = io::resolve_seed(args.seed.or(base.seed));
    let configs = bsc_grid(&base, &args.fwd, &args.bwd, args.repeats, root);
    for cfg in &configs {
        cfg.validate()?;
    }
    let rows = sweep(&configs)?;

    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(
            File::create(p)
                .map_err(|e| Failure::config(format!("creating {}: {e}", p.display())))?,
        ),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in &rows {
        w.serialize(row)
            .map_err(|e| Failure::config(format!("writing csv: {e}")))?;
    }
    w.flush()
        .map_err(|e| Failure::config(format!("writing csv: {e}")))?;
    Ok(SUCCESS)
}
