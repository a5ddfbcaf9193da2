use thiserror::Error;

/// Errors raised by the library. Dimension and length mismatches signal a
/// caller bug; the remaining variants are recoverable conditions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("rows not independent: rank {rank} < {rows} rows")]
    RowsNotIndependent { rank: usize, rows: usize },

    #[error("toeplitz seed must have {expected} bits, got {found}")]
    InvalidSeedLength { expected: usize, found: usize },

    #[error("output length {n_pa} must not exceed input length {n}")]
    InvalidPaShape { n_pa: usize, n: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("instance too large for exhaustive mode: {0}")]
    TooLarge(String),

    #[error("rate {value} for {name} outside [{lo}, {hi}]")]
    RateOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("key pool exhausted: need {needed} bits, {available} available")]
    PoolExhausted { needed: usize, available: usize },

    #[error("empty test set for {0}")]
    EmptyTestSet(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
