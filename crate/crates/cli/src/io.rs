use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::exit::Failure;

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("reading {}: {e}", path.display())))
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure::config(format!("writing {}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::config(format!("writing stdout: {e}"))),
    }
}

pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::config(format!("serializing: {e}")))?;
    emit(&text, path)
}

/// The given seed, or a fresh one. Either way it is printed to stderr so
/// the run can be replayed.
pub fn resolve_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or_else(dpa_core::protocol::fresh_seed);
    eprintln!("seed: {seed}");
    seed
}
