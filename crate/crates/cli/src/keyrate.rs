use dpa_core::protocol::{asymptotic_rate, key_length, special_case_rate, KeyLedger};
use serde::Serialize;

use crate::exit::{Outcome, ABORT, SUCCESS};
use crate::io;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Raw key length N.
    #[arg(long)]
    n: usize,
    /// Round-trip key-bit error rate, charged for error correction.
    #[arg(long)]
    eb_roundtrip: f64,
    /// Phase error rate of the forward line.
    #[arg(long)]
    ep: f64,
    /// Also report 1 − h(2·e_b) − h(e_p) for this per-line bit error rate.
    #[arg(long)]
    special_eb: Option<f64>,
}

#[derive(Debug, Serialize)]
struct KeyrateReport {
    #[serde(flatten)]
    ledger: KeyLedger,
    /// `1 − h(e_ec) − h(e_p)`.
    rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    special_case: Option<SpecialCase>,
}

#[derive(Debug, Serialize)]
struct SpecialCase {
    e_b: f64,
    e_p: f64,
    rate: f64,
}

pub fn run(args: Args) -> Outcome {
    let ledger = key_length(args.n, args.eb_roundtrip, args.ep)?;
    let special_case = match args.special_eb {
        Some(e_b) => Some(SpecialCase {
            e_b,
            e_p: args.ep,
            rate: special_case_rate(e_b, args.ep)?,
        }),
        None => None,
    };
    let report = KeyrateReport {
        rate: asymptotic_rate(args.eb_roundtrip, args.ep)?,
        special_case,
        ledger,
    };
    io::emit_json(&report, None)?;
    Ok(if report.ledger.abort { ABORT } else { SUCCESS })
}
