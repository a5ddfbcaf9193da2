//! Independent runs over a parameter grid, executed in parallel and
//! reported in grid order.

use rand::Rng;
use serde::Serialize;

use super::channel::ChannelModel;
use super::config::SimConfig;
use super::sim::{simulate, stream_rng};
use crate::error::Result;
use crate::par;

const SWEEP_STREAM_BASE: u64 = 1 << 32;

/// Seed of run `index` of a sweep rooted at `base`.
pub fn derive_seed(base: u64, index: usize) -> u64 {
    stream_rng(base, SWEEP_STREAM_BASE + index as u64).random()
}

/// One ledger row per run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub protocol: String,
    pub seed: u64,
    pub forward: String,
    pub backward: String,
    pub abort: bool,
    pub n: usize,
    pub n_test: usize,
    pub n_pa: Option<usize>,
    pub n_ec: Option<usize>,
    pub n_key: Option<i64>,
    pub e_x: Option<f64>,
    pub e_z: Option<f64>,
    pub e_b: Option<f64>,
    pub e_p: Option<f64>,
    pub e_roundtrip: Option<f64>,
    pub h_ec: Option<f64>,
    pub h_p: Option<f64>,
    pub keys_match: Option<bool>,
}

/// `base` with bsc noise at every `(forward, backward)` pair, `repeats` times
/// each, seeds derived from `base_seed`.
pub fn bsc_grid(
    base: &SimConfig,
    forward: &[f64],
    backward: &[f64],
    repeats: usize,
    base_seed: u64,
) -> Vec<SimConfig> {
    let mut out = Vec::new();
    for &ef in forward {
        for &eb in backward {
            for _ in 0..repeats {
                let mut cfg = base.clone();
                cfg.channels.forward = ChannelModel::Bsc(ef);
                cfg.channels.backward = ChannelModel::Bsc(eb);
                cfg.seed = Some(derive_seed(base_seed, out.len()));
                out.push(cfg);
            }
        }
    }
    out
}

pub fn sweep(configs: &[SimConfig]) -> Result<Vec<SweepRow>> {
    let indexed: Vec<(usize, &SimConfig)> = configs.iter().enumerate().collect();
    par::map_slice(&indexed, |&(index, cfg)| {
        let t = simulate(cfg)?;
        let l = t.key_ledger.as_ref();
        let e = t.error_estimate.as_ref();
        Ok(SweepRow {
            index,
            protocol: cfg.protocol.to_string(),
            seed: t.seed,
            forward: cfg.channels.forward.to_string(),
            backward: cfg.channels.backward.to_string(),
            abort: t.abort,
            n: cfg.n,
            n_test: cfg.n_test(),
            n_pa: l.map(|l| l.n_pa),
            n_ec: l.map(|l| l.n_ec),
            n_key: l.map(|l| l.n_key),
            e_x: e.map(|e| e.e_x),
            e_z: e.map(|e| e.e_z),
            e_b: e.map(|e| e.e_b),
            e_p: e.map(|e| e.e_p),
            e_roundtrip: e.and_then(|e| e.e_roundtrip),
            h_ec: l.map(|l| l.h_ec),
            h_p: l.map(|l| l.h_p),
            keys_match: t.keys_match(),
        })
    })
    .into_iter()
    .collect()
}
