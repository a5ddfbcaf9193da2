//! Monte-Carlo simulation of the forward-line BB84, two-way DQKD, the
//! integrated Protocol 1 + 2/2b/2c/2d chain and the trusted relay, with
//! error estimation and key-rate accounting.

pub mod channel;
pub mod config;
pub mod equivalence;
pub mod estimate;
pub mod keyrate;
pub mod sim;
pub mod sweep;
pub mod table1;
pub mod transcript;

pub use channel::{ChannelModel, EveKind, EveModel, Interception, Line, Qubit};
pub use config::{Channels, ForcedRates, PaChoice, ProtocolKind, RelayScheme, Sifting, SimConfig};
pub use equivalence::{check_signal_equivalence, signal_state, SignalEquivalence};
pub use estimate::{estimate_errors, ErrorEstimate, Tally, TestBit};
pub use keyrate::{
    asymptotic_rate, binary_entropy, clamp_rate, key_length, special_case_rate, KeyLedger,
};
pub use sim::{
    fresh_seed, run_bb84, run_dqkd, run_integrated, run_relay, simulate, simulate_report,
    stream_rng,
};
pub use sweep::{bsc_grid, derive_seed, sweep, SweepRow};
pub use table1::{decode_key_bit, op_for_bit, ops_for_bit, table1_round_trips, Table1Case};
pub use transcript::{
    key_digest, DelayedOutcome, Mode, ProtocolTranscript, RelayOutcome, Report, Role, SiftStats,
    SignalRecord, Timing,
};
