//! `dpa`: key-rate arithmetic, PA utilities, protocol simulation and the
//! verification suites.
//!
//! Exit codes: 0 success, 2 protocol abort, 3 configuration error,
//! 4 verification failure.

mod exit;
mod io;
mod keyrate;
mod pa;
mod simulate;
mod sweep;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use exit::{Failure, CONFIG_ERROR};

#[derive(Debug, Parser)]
#[command(
    name = "dpa",
    version,
    about = "Delayed privacy amplification and two-way QKD toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Key ledger for N raw bits at the given error rates.
    Keyrate(keyrate::Args),
    /// Monte-Carlo run of one protocol.
    Simulate(simulate::Args),
    /// Run a verification suite.
    Verify(verify::Args),
    /// Grid of simulations over forward/backward bsc noise, as CSV.
    Sweep(sweep::Args),
    /// Privacy-amplification utilities.
    #[command(subcommand)]
    Pa(pa::Command),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Keyrate(args) => keyrate::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Verify(args) => verify::run(args),
        Command::Sweep(args) => sweep::run(args),
        Command::Pa(cmd) => pa::run(cmd),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
