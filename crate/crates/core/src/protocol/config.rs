//! Simulation configuration document.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::channel::{ChannelModel, EveModel};
use crate::error::{Error, Result};
use crate::quantum::Basis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolKind {
    #[serde(rename = "bb84")]
    Bb84,
    #[serde(rename = "dqkd")]
    Dqkd,
    #[serde(rename = "integrated-2")]
    Integrated2,
    #[serde(rename = "integrated-2b")]
    Integrated2b,
    #[serde(rename = "integrated-2c")]
    Integrated2c,
    #[serde(rename = "integrated-2d")]
    Integrated2d,
    #[serde(rename = "relay")]
    Relay,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 7] = [
        ProtocolKind::Bb84,
        ProtocolKind::Dqkd,
        ProtocolKind::Integrated2,
        ProtocolKind::Integrated2b,
        ProtocolKind::Integrated2c,
        ProtocolKind::Integrated2d,
        ProtocolKind::Relay,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::Bb84 => "bb84",
            ProtocolKind::Dqkd => "dqkd",
            ProtocolKind::Integrated2 => "integrated-2",
            ProtocolKind::Integrated2b => "integrated-2b",
            ProtocolKind::Integrated2c => "integrated-2c",
            ProtocolKind::Integrated2d => "integrated-2d",
            ProtocolKind::Relay => "relay",
        }
    }

    pub fn is_two_way(self) -> bool {
        !matches!(self, ProtocolKind::Bb84 | ProtocolKind::Relay)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown protocol `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channels {
    #[serde(default)]
    pub forward: ChannelModel,
    #[serde(default)]
    pub backward: ChannelModel,
}

/// Where the Toeplitz seed of the PA function comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaChoice {
    /// Drawn from the run's own PA stream.
    #[default]
    Auto,
    /// Drawn from a generator seeded with this value, independent of the run seed.
    Seed(u64),
}

/// How Protocol 1 handles basis choice on the forward line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sifting {
    /// Alice stores qubits and measures after Bob announces the bases; no
    /// signal is lost.
    #[default]
    Memory,
    /// Alice measures immediately in a random basis; mismatched signals are
    /// discarded until enough bits are kept.
    Sifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelayScheme {
    /// The pool bits are the expanded message; `n` bits consumed.
    #[default]
    Delayed,
    /// The pool bits pad the final key; `N_PA` bits consumed.
    Normal,
}

/// Rates substituted for the measured ones in the key ledger.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcedRates {
    pub e_roundtrip: Option<f64>,
    pub e_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub protocol: ProtocolKind,
    /// Raw key length `N`.
    pub n: usize,
    /// Check-mode (test) signals; defaults to `max(n/10, 64)`.
    #[serde(default)]
    pub n_test: Option<usize>,
    /// Key bits disclosed for the round-trip error test; defaults to `n_test`.
    #[serde(default)]
    pub n_key_test: Option<usize>,
    /// Probability that Alice measures a check signal in `z`.
    #[serde(default = "half")]
    pub check_fraction: f64,
    #[serde(default)]
    pub channels: Channels,
    #[serde(default)]
    pub eve: EveModel,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub pa: PaChoice,
    #[serde(default)]
    pub sifting: Sifting,
    /// Bob prepares every signal in this basis.
    #[serde(default)]
    pub forced_basis: Option<Basis>,
    #[serde(default)]
    pub forced_rates: ForcedRates,
    /// Fewer consistent-basis test bits than this in either basis aborts.
    #[serde(default = "one")]
    pub min_check_per_basis: usize,
    /// Relay pool size; defaults to `n`.
    #[serde(default)]
    pub pool: Option<usize>,
    #[serde(default)]
    pub relay_scheme: RelayScheme,
}

fn half() -> f64 {
    0.5
}

fn one() -> usize {
    1
}

impl SimConfig {
    pub fn new(protocol: ProtocolKind, n: usize) -> Self {
        Self {
            protocol,
            n,
            n_test: None,
            n_key_test: None,
            check_fraction: 0.5,
            channels: Channels::default(),
            eve: EveModel::none(),
            seed: None,
            pa: PaChoice::Auto,
            sifting: Sifting::Memory,
            forced_basis: None,
            forced_rates: ForcedRates::default(),
            min_check_per_basis: 1,
            pool: None,
            relay_scheme: RelayScheme::Delayed,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn n_test(&self) -> usize {
        self.n_test.unwrap_or((self.n / 10).max(64))
    }

    pub fn n_key_test(&self) -> usize {
        self.n_key_test.unwrap_or_else(|| self.n_test())
    }

    pub fn pool(&self) -> usize {
        self.pool.unwrap_or(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.n_test() == 0 {
            return bad("n_test must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.check_fraction) {
            return bad(format!(
                "check_fraction {} outside [0, 1]",
                self.check_fraction
            ));
        }
        self.channels.forward.validate()?;
        self.channels.backward.validate()?;
        for (name, rate) in [
            ("forced e_roundtrip", self.forced_rates.e_roundtrip),
            ("forced e_p", self.forced_rates.e_p),
        ] {
            if let Some(r) = rate {
                if !(0.0..=0.5).contains(&r) {
                    return bad(format!("{name} {r} outside [0, 0.5]"));
                }
            }
        }
        if self.protocol == ProtocolKind::Integrated2 && !self.channels.backward.is_noiseless() {
            return bad("integrated-2 sends its pad over a classical line; the backward channel must be noiseless".into());
        }
        if self.protocol == ProtocolKind::Relay && self.pool() < self.n {
            return Err(Error::PoolExhausted {
                needed: self.n,
                available: self.pool(),
            });
        }
        Ok(())
    }
}
