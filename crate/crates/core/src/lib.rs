//! Delayed privacy amplification over GF(2) and the two-way deterministic QKD
//! protocol family built on it.
//!
//! * [`gf2`]: bit-packed vectors and matrices, elimination, Toeplitz hashing.
//! * [`pa`]: additive privacy amplification, PA-inverse message expansion and
//!   one-time pad helpers.
//! * [`quantum`]: a small dense density-matrix engine plus the joint states of
//!   the measured and depolarized backward-line variants.
//! * [`security`]: trace-distance security parameters and an exhaustive
//!   checker for delayed-PA security equivalence.
//! * [`protocol`]: seeded Monte-Carlo simulation of BB84, the two-way
//!   deterministic protocol, the integrated variants and a trusted relay.

pub mod error;
pub mod gf2;
pub mod pa;
pub mod par;
pub mod protocol;
pub mod quantum;
pub mod security;

pub use error::{Error, Result};
