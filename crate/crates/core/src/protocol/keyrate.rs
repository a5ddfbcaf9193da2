use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `h(e) = −e log₂ e − (1−e) log₂(1−e)`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(e: f64) -> f64 {
    if e <= 0.0 || e >= 1.0 {
        return 0.0;
    }
    -e * e.log2() - (1.0 - e) * (1.0 - e).log2()
}

fn check_rate(name: &'static str, value: f64, hi: f64) -> Result<f64> {
    if (0.0..=hi).contains(&value) {
        Ok(value)
    } else {
        Err(Error::RateOutOfRange {
            name,
            value,
            lo: 0.0,
            hi,
        })
    }
}

/// Measured error rates above one half carry no key; they are accounted as
/// one half, where `h = 1`.
pub fn clamp_rate(e: f64) -> f64 {
    e.clamp(0.0, 0.5)
}

/// Bit accounting of one key distillation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyLedger {
    /// Raw key length `N`.
    pub n: usize,
    pub n_test: usize,
    /// `floor(N (1 − h(e_p)))`.
    pub n_pa: usize,
    /// `ceil(N h(e_ec))`, paid from pre-shared secret bits.
    pub n_ec: usize,
    /// `N_PA − N_EC`; the run aborts when this is not positive.
    pub n_key: i64,
    pub abort: bool,
    /// Rate the error-correction cost is charged at.
    pub e_ec: f64,
    pub e_p: f64,
    pub h_ec: f64,
    pub h_p: f64,
    /// `h(e_b)` of the forward line, when measured.
    pub h_b: Option<f64>,
    pub pre_shared_consumed: usize,
    /// Relay pool bits used to carry the key onward.
    pub pool_consumed: Option<usize>,
}

/// Ledger for `n` raw bits with error-correction rate `e_ec` (the round-trip
/// rate for two-way protocols) and phase error rate `e_p`.
pub fn key_length(n: usize, e_ec: f64, e_p: f64) -> Result<KeyLedger> {
    check_rate("e_ec", e_ec, 0.5)?;
    check_rate("e_p", e_p, 0.5)?;
    let (h_ec, h_p) = (binary_entropy(e_ec), binary_entropy(e_p));
    let nf = n as f64;
    let n_pa = (nf * (1.0 - h_p)).floor().max(0.0) as usize;
    let n_ec = (nf * h_ec).ceil() as usize;
    let n_key = n_pa as i64 - n_ec as i64;
    Ok(KeyLedger {
        n,
        n_test: 0,
        n_pa,
        n_ec,
        n_key,
        abort: n_key <= 0,
        e_ec,
        e_p,
        h_ec,
        h_p,
        h_b: None,
        pre_shared_consumed: n_ec,
        pool_consumed: None,
    })
}

/// `1 − h(e_ec) − h(e_p)`, the asymptotic key rate per raw bit.
pub fn asymptotic_rate(e_ec: f64, e_p: f64) -> Result<f64> {
    check_rate("e_ec", e_ec, 0.5)?;
    check_rate("e_p", e_p, 0.5)?;
    Ok(1.0 - binary_entropy(e_ec) - binary_entropy(e_p))
}

/// Rate when both lines have bit error rate `e_b` and the round-trip rate is
/// only bounded by `2 e_b`: `1 − h(2 e_b) − h(e_p)`.
pub fn special_case_rate(e_b: f64, e_p: f64) -> Result<f64> {
    check_rate("e_b", e_b, 0.25)?;
    asymptotic_rate(2.0 * e_b, e_p)
}
