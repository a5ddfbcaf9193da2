//! Per-signal qubit transport: explicit two-amplitude states, Pauli noise and
//! an intercept-resend eavesdropper.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{c, Basis, Pauli, C64};

/// A single qubit `α|0_z⟩ + β|1_z⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qubit([C64; 2]);

impl Qubit {
    pub fn prepare(basis: Basis, bit: bool) -> Self {
        Self(basis.eigenstate(bit))
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        self.0
    }

    pub fn apply(&mut self, p: Pauli) {
        let [a, b] = self.0;
        self.0 = match p {
            Pauli::I => [a, b],
            Pauli::X => [b, a],
            Pauli::Y => [c(0.0, -1.0) * b, c(0.0, 1.0) * a],
            Pauli::Z => [a, -b],
        };
    }

    /// `|⟨bit_w|ψ⟩|²`.
    pub fn probability(&self, basis: Basis, bit: bool) -> f64 {
        let [e0, e1] = basis.eigenstate(bit);
        (e0.conj() * self.0[0] + e1.conj() * self.0[1]).norm_sqr()
    }

    /// Projective measurement in `basis`; the state collapses to the outcome.
    /// Always consumes exactly one draw from `rng`.
    pub fn measure<R: Rng + ?Sized>(&mut self, basis: Basis, rng: &mut R) -> bool {
        let u: f64 = rng.random();
        let outcome = u >= self.probability(basis, false);
        *self = Self::prepare(basis, outcome);
        outcome
    }
}

/// Independent per-signal noise on one line.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "lowercase")]
pub enum ChannelModel {
    #[default]
    Noiseless,
    /// `I, X, Y, Z` with probabilities `1 − 3p/4, p/4, p/4, p/4`.
    Depolarizing(f64),
    /// `Y` with probability `e`: flips both `x` and `z` eigenstates.
    Bsc(f64),
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelModel::Noiseless => Ok(()),
            ChannelModel::Depolarizing(p) | ChannelModel::Bsc(p) => {
                if (0.0..=1.0).contains(&p) {
                    Ok(())
                } else {
                    Err(Error::RateOutOfRange {
                        name: "channel parameter",
                        value: p,
                        lo: 0.0,
                        hi: 1.0,
                    })
                }
            }
        }
    }

    /// Bit error rate induced in either basis.
    pub fn error_rate(&self) -> f64 {
        match *self {
            ChannelModel::Noiseless => 0.0,
            ChannelModel::Depolarizing(p) => p / 2.0,
            ChannelModel::Bsc(e) => e,
        }
    }

    /// Kraus weights of `I, X, Y, Z`.
    pub fn pauli_weights(&self) -> [f64; 4] {
        match *self {
            ChannelModel::Noiseless => [1.0, 0.0, 0.0, 0.0],
            ChannelModel::Depolarizing(p) => [1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0],
            ChannelModel::Bsc(e) => [1.0 - e, 0.0, e, 0.0],
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.pauli_weights()[0] == 1.0
    }

    /// Draw the Pauli applied to one signal. Consumes one draw from `rng`
    /// for every model, so streams stay aligned across channel choices.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        let u: f64 = rng.random();
        let w = self.pauli_weights();
        let mut acc = 0.0;
        for (p, weight) in Pauli::ALL.into_iter().zip(w) {
            acc += weight;
            if u < acc {
                return p;
            }
        }
        // rounding: the last Pauli with positive weight
        Pauli::ALL
            .into_iter()
            .zip(w)
            .rev()
            .find(|(_, weight)| *weight > 0.0)
            .map_or(Pauli::I, |(p, _)| p)
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelModel::Noiseless => write!(f, "noiseless"),
            ChannelModel::Depolarizing(p) => write!(f, "depolarizing:{p}"),
            ChannelModel::Bsc(e) => write!(f, "bsc:{e}"),
        }
    }
}

impl FromStr for ChannelModel {
    type Err = Error;

    /// `noiseless`, `bsc:E` or `depolarizing:P`.
    fn from_str(s: &str) -> Result<Self> {
        let model = match s.split_once(':') {
            None if s == "noiseless" || s == "none" => ChannelModel::Noiseless,
            Some((kind, param)) => {
                let p: f64 = param
                    .parse()
                    .map_err(|e| Error::Parse(format!("channel parameter `{param}`: {e}")))?;
                match kind {
                    "bsc" => ChannelModel::Bsc(p),
                    "depolarizing" | "depol" => ChannelModel::Depolarizing(p),
                    _ => return Err(Error::Parse(format!("unknown channel `{kind}`"))),
                }
            }
            None => return Err(Error::Parse(format!("unknown channel `{s}`"))),
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Line {
    /// Bob to Alice.
    Forward,
    /// Alice to Bob.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EveKind {
    #[default]
    None,
    /// Measure every signal in a uniformly random basis and resend the
    /// eigenstate of the outcome.
    InterceptResend,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EveModel {
    #[serde(default)]
    pub kind: EveKind,
    #[serde(default)]
    pub lines: Vec<Line>,
}

/// What an intercepting Eve did to one signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interception {
    pub basis: Basis,
    pub outcome: bool,
}

impl EveModel {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn intercept_resend(lines: &[Line]) -> Self {
        Self {
            kind: EveKind::InterceptResend,
            lines: lines.to_vec(),
        }
    }

    pub fn attacks(&self, line: Line) -> bool {
        self.kind == EveKind::InterceptResend && self.lines.contains(&line)
    }

    /// Act on a signal travelling on `line`. Consumes two draws when
    /// attacking and none otherwise.
    pub fn intercept<R: Rng + ?Sized>(
        &self,
        line: Line,
        q: &mut Qubit,
        rng: &mut R,
    ) -> Option<Interception> {
        if !self.attacks(line) {
            return None;
        }
        let basis = if rng.random::<bool>() {
            Basis::X
        } else {
            Basis::Z
        };
        let outcome = q.measure(basis, rng);
        Some(Interception { basis, outcome })
    }
}

impl FromStr for EveModel {
    type Err = Error;

    /// `none`, `intercept-resend` (forward line), or
    /// `intercept-resend:forward|backward|both`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, lines) = s.split_once(':').unwrap_or((s, "forward"));
        match kind {
            "none" => Ok(Self::none()),
            "intercept-resend" => {
                let lines = match lines {
                    "forward" => vec![Line::Forward],
                    "backward" => vec![Line::Backward],
                    "both" => vec![Line::Forward, Line::Backward],
                    _ => return Err(Error::Parse(format!("unknown line set `{lines}`"))),
                };
                Ok(Self::intercept_resend(&lines))
            }
            _ => Err(Error::Parse(format!("unknown eavesdropper `{kind}`"))),
        }
    }
}
