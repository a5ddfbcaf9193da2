#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.stdout)
            .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", self.stdout))
    }

    /// The seed the CLI printed for replay.
    pub fn printed_seed(&self) -> u64 {
        self.stderr
            .lines()
            .find_map(|l| l.strip_prefix("seed: "))
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or_else(|| panic!("no seed on stderr: {}", self.stderr))
    }
}

pub fn dpa(args: &[&str]) -> Run {
    let Output {
        status,
        stdout,
        stderr,
    } = Command::new(env!("CARGO_BIN_EXE_dpa"))
        .args(args)
        .output()
        .expect("dpa runs");
    Run {
        code: status.code().expect("exit code"),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn load(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name);
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

/// Validator for `schemas/<name>.schema.json`, with the sibling schemas
/// registered for cross references.
pub fn validator(name: &str) -> jsonschema::Validator {
    let mut options = jsonschema::options();
    for other in ["config", "report", "keyrate", "verify", "session"] {
        let resource =
            jsonschema::Resource::from_contents(load(&format!("{other}.schema.json"))).unwrap();
        options = options.with_resource(format!("urn:dpa:{other}"), resource);
    }
    options
        .build(&load(&format!("{name}.schema.json")))
        .unwrap()
}

pub fn assert_valid(validator: &jsonschema::Validator, instance: &Value) {
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

/// The report text, byte for byte, minus the line carrying the timing value.
pub fn without_timing(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains("\"elapsed_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}
