//! Error-rate estimation from disclosed test bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::Basis;

/// A disclosed bit: what was sent and what arrived, in a consistent basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestBit {
    pub basis: Basis,
    pub sent: bool,
    pub received: bool,
}

/// Disagreement count over `count` compared bits.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub count: usize,
    pub errors: usize,
    pub rate: f64,
    /// Binomial standard error `√(r(1−r)/count)`.
    pub std_error: f64,
}

impl Tally {
    pub fn new(count: usize, errors: usize) -> Self {
        let rate = if count == 0 {
            0.0
        } else {
            errors as f64 / count as f64
        };
        let std_error = if count == 0 {
            0.0
        } else {
            (rate * (1.0 - rate) / count as f64).sqrt()
        };
        Self {
            count,
            errors,
            rate,
            std_error,
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (bool, bool)>>(pairs: I) -> Self {
        let (mut count, mut errors) = (0, 0);
        for (a, b) in pairs {
            count += 1;
            errors += usize::from(a != b);
        }
        Self::new(count, errors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub e_x: f64,
    pub e_z: f64,
    /// `(e_x + e_z) / 2`.
    pub e_b: f64,
    /// `(e_z + e_x) / 2`: the phase error of the `z` (`x`) bits is the bit
    /// error of the `x` (`z`) test bits.
    pub e_p: f64,
    /// Key-bit error rate of a two-way run.
    pub e_roundtrip: Option<f64>,
    pub se_x: f64,
    pub se_z: f64,
    pub se_b: f64,
    pub se_p: f64,
    pub se_roundtrip: Option<f64>,
    pub x: Tally,
    pub z: Tally,
    pub roundtrip: Option<Tally>,
}

impl ErrorEstimate {
    pub fn with_roundtrip(mut self, tally: Tally) -> Self {
        self.e_roundtrip = Some(tally.rate);
        self.se_roundtrip = Some(tally.std_error);
        self.roundtrip = Some(tally);
        self
    }
}

/// Per-basis disagreement frequencies of `tests`.
///
/// Each basis needs at least `min_per_basis` (and at least one) test bits.
pub fn estimate_errors(tests: &[TestBit], min_per_basis: usize) -> Result<ErrorEstimate> {
    let tally = |basis| {
        Tally::from_pairs(
            tests
                .iter()
                .filter(|t| t.basis == basis)
                .map(|t| (t.sent, t.received)),
        )
    };
    let (x, z) = (tally(Basis::X), tally(Basis::Z));
    let min = min_per_basis.max(1);
    if x.count < min {
        return Err(Error::EmptyTestSet("x-basis test bits"));
    }
    if z.count < min {
        return Err(Error::EmptyTestSet("z-basis test bits"));
    }
    let mean = (x.rate + z.rate) / 2.0;
    let se = 0.5 * (x.std_error.powi(2) + z.std_error.powi(2)).sqrt();
    Ok(ErrorEstimate {
        e_x: x.rate,
        e_z: z.rate,
        e_b: mean,
        e_p: mean,
        e_roundtrip: None,
        se_x: x.std_error,
        se_z: z.std_error,
        se_b: se,
        se_p: se,
        se_roundtrip: None,
        x,
        z,
        roundtrip: None,
    })
}
