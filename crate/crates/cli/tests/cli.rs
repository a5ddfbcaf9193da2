mod common;

use common::{assert_valid, dpa, validator, without_timing};
use serde_json::Value;
use tempfile::TempDir;

fn h(e: f64) -> f64 {
    if e <= 0.0 || e >= 1.0 {
        0.0
    } else {
        -e * e.log2() - (1.0 - e) * (1.0 - e).log2()
    }
}

#[test]
fn keyrate_examples() {
    let v = validator("keyrate");

    let r = dpa(&["keyrate", "--n", "1000", "--eb-roundtrip", "0", "--ep", "0"]);
    assert_eq!(r.code, 0);
    assert_valid(&v, &r.json());
    assert_eq!(r.json()["n_key"], 1000);

    // 1 − 2h(0.25) < 0
    let r = dpa(&[
        "keyrate",
        "--n",
        "1000",
        "--eb-roundtrip",
        "0.25",
        "--ep",
        "0.25",
    ]);
    assert_eq!(r.code, 2);
    assert_valid(&v, &r.json());
    assert_eq!(r.json()["abort"], true);
    assert!(1.0 - 2.0 * h(0.25) < 0.0);

    let r = dpa(&[
        "keyrate",
        "--n",
        "1000",
        "--eb-roundtrip",
        "0.05",
        "--ep",
        "0.05",
        "--special-eb",
        "0.05",
    ]);
    assert_eq!(r.code, 0);
    let j = r.json();
    assert_valid(&v, &j);
    let oracle = (1000.0 * (1.0 - h(0.05))).floor() - (1000.0 * h(0.05)).ceil();
    assert_eq!(j["n_key"].as_f64().unwrap(), oracle);
    // floor and ceil together lose less than two bits against N(1 − 2h)
    let nominal = 1000.0 * (1.0 - 2.0 * h(0.05));
    assert!((j["n_key"].as_f64().unwrap() - nominal).abs() < 2.0, "{j}");
    let special = 1.0 - h(0.1) - h(0.05);
    assert!((j["special_case"]["rate"].as_f64().unwrap() - special).abs() < 1e-12);
}

#[test]
fn bad_flags_are_config_errors() {
    assert_eq!(
        dpa(&["keyrate", "--n", "10", "--eb-roundtrip", "0.6", "--ep", "0"]).code,
        3
    );
    assert_eq!(dpa(&["keyrate", "--n", "10", "--ep", "0"]).code, 3);
    assert_eq!(
        dpa(&[
            "keyrate",
            "--n",
            "10",
            "--eb-roundtrip",
            "0",
            "--ep",
            "0",
            "--nope"
        ])
        .code,
        3
    );
    assert_eq!(dpa(&["simulate", "qkd9", "--seed", "1"]).code, 3);
    assert_eq!(
        dpa(&["simulate", "dqkd", "--noise-fwd", "bsc:2", "--seed", "1"]).code,
        3
    );
    assert_eq!(
        dpa(&["simulate", "relay", "--n", "100", "--pool", "50", "--seed", "1"]).code,
        3
    );
    assert_eq!(
        dpa(&[
            "simulate",
            "integrated-2",
            "--noise-bwd",
            "bsc:0.01",
            "--seed",
            "1"
        ])
        .code,
        3
    );
    assert_eq!(dpa(&["simulate", "--seed", "1"]).code, 3);
    assert_eq!(
        dpa(&["verify", "--suite", "delayed-pa", "--n", "7"]).code,
        3
    );
    assert_eq!(
        dpa(&["verify", "--suite", "protocol-2c2d", "--abar-dim", "1000"]).code,
        3
    );
    assert_eq!(dpa(&["--help"]).code, 0);
}

#[test]
fn simulate_reports_validate() {
    let v = validator("report");
    for args in [
        vec!["simulate", "bb84", "--n", "2000", "--seed", "3"],
        vec![
            "simulate",
            "bb84",
            "--n",
            "2000",
            "--seed",
            "3",
            "--sifting",
            "sifted",
        ],
        vec![
            "simulate",
            "dqkd",
            "--n",
            "2000",
            "--seed",
            "3",
            "--noise-fwd",
            "depolarizing:0.03",
        ],
        vec!["simulate", "integrated-2", "--n", "1000", "--seed", "3"],
        vec![
            "simulate",
            "integrated-2b",
            "--n",
            "1000",
            "--seed",
            "3",
            "--noise-fwd",
            "bsc:0.01",
        ],
        vec![
            "simulate",
            "integrated-2c",
            "--n",
            "1000",
            "--seed",
            "3",
            "--noise-bwd",
            "bsc:0.01",
            "--check-equivalence",
            "5",
        ],
        vec![
            "simulate",
            "integrated-2d",
            "--n",
            "1000",
            "--seed",
            "3",
            "--check-equivalence",
            "5",
        ],
        vec![
            "simulate",
            "relay",
            "--n",
            "1000",
            "--seed",
            "3",
            "--relay-scheme",
            "normal",
        ],
        vec![
            "simulate",
            "bb84",
            "--n",
            "2000",
            "--seed",
            "3",
            "--eve",
            "intercept-resend",
        ],
    ] {
        let r = dpa(&args);
        assert!(r.code == 0 || r.code == 2, "{args:?}: {}", r.stderr);
        assert_valid(&v, &r.json());
    }
}

#[test]
fn simulate_examples() {
    let r = dpa(&[
        "simulate",
        "dqkd",
        "--n",
        "10000",
        "--noise-fwd",
        "bsc:0.02",
        "--noise-bwd",
        "bsc:0.02",
        "--seed",
        "7",
    ]);
    assert_eq!(r.code, 0);
    let e = &r.json()["error_estimate"];
    let (p, count) = (2.0 * 0.02 * 0.98, e["roundtrip"]["count"].as_f64().unwrap());
    let sigma = (p * (1.0 - p) / count).sqrt();
    assert!(
        (e["e_roundtrip"].as_f64().unwrap() - p).abs() <= 3.0 * sigma,
        "{e}"
    );

    let r = dpa(&[
        "simulate",
        "bb84",
        "--n",
        "10000",
        "--eve",
        "intercept-resend",
        "--seed",
        "7",
    ]);
    assert_eq!(r.code, 2);
    let j = r.json();
    assert_eq!(j["abort"], true);
    let e = &j["error_estimate"];
    let tests = e["x"]["count"].as_f64().unwrap() + e["z"]["count"].as_f64().unwrap();
    assert!(
        (e["e_b"].as_f64().unwrap() - 0.25).abs() <= 3.0 * (0.25 * 0.75 / tests).sqrt(),
        "{e}"
    );

    let r = dpa(&["simulate", "relay", "--n", "1024", "--seed", "1"]);
    assert_eq!(r.code, 0);
    let relay = &r.json()["relay"];
    assert_eq!(relay["bob_key_digest"], relay["charlie_key_digest"]);
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("cfg.json");
    let cfg = r#"{"protocol": "dqkd", "n": 1500, "seed": 11, "channels": {"forward": {"kind": "bsc", "param": 0.01}}}"#;
    std::fs::write(&path, cfg).unwrap();
    let config: Value = serde_json::from_str(cfg).unwrap();
    assert_valid(&validator("config"), &config);
    let p = path.to_str().unwrap();

    let r = dpa(&["simulate", "--config", p]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let j = r.json();
    assert_eq!(
        (
            j["protocol"].as_str(),
            j["seed"].as_u64(),
            j["config"]["n"].as_u64()
        ),
        (Some("dqkd"), Some(11), Some(1500))
    );
    assert_eq!(j["config"]["channels"]["forward"]["param"], 0.01);

    let r = dpa(&[
        "simulate",
        "bb84",
        "--config",
        p,
        "--n",
        "900",
        "--seed",
        "12",
        "--noise-fwd",
        "noiseless",
    ]);
    let j = r.json();
    assert_eq!(
        (
            j["protocol"].as_str(),
            j["seed"].as_u64(),
            j["config"]["n"].as_u64()
        ),
        (Some("bb84"), Some(12), Some(900))
    );
    assert_eq!(j["config"]["channels"]["forward"]["kind"], "noiseless");

    std::fs::write(&path, r#"{"protocol": "dqkd", "n": 10, "colour": 1}"#).unwrap();
    assert_eq!(dpa(&["simulate", "--config", p]).code, 3);
}

#[test]
fn report_round_trips_through_out_and_transcript() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let tr = dir.path().join("t.json");
    let r = dpa(&[
        "simulate",
        "integrated-2c",
        "--n",
        "500",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
        "--transcript",
        tr.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let transcript: Value = serde_json::from_str(&std::fs::read_to_string(&tr).unwrap()).unwrap();
    assert_eq!(report["seed"], transcript["seed"]);
    assert!(transcript["signals"].as_array().unwrap().len() >= 500);
}

#[test]
fn replay_is_byte_identical() {
    for args in [
        vec![
            "simulate",
            "integrated-2d",
            "--n",
            "800",
            "--noise-fwd",
            "bsc:0.03",
        ],
        vec!["simulate", "bb84", "--n", "800", "--sifting", "sifted"],
        vec![
            "verify",
            "--suite",
            "preimage-uniformity",
            "--draws",
            "2000",
        ],
    ] {
        let first = dpa(&args);
        let seed = first.printed_seed().to_string();
        let mut replay = args.clone();
        replay.extend(["--seed", seed.as_str()]);
        let second = dpa(&replay);
        assert_eq!(first.code, second.code);
        assert_eq!(
            without_timing(&first.stdout),
            without_timing(&second.stdout),
            "{args:?}"
        );
    }
}

#[test]
fn verify_suites_pass_and_validate() {
    let v = validator("verify");
    for args in [
        vec!["verify", "--suite", "table1"],
        vec![
            "verify",
            "--suite",
            "protocol-2c2d",
            "--trials",
            "20",
            "--abar-dim",
            "4",
            "--seed",
            "1",
        ],
        vec![
            "verify",
            "--suite",
            "delayed-pa",
            "--n",
            "3",
            "--npa",
            "2",
            "--quantum-models",
            "3",
            "--seed",
            "1",
        ],
        vec![
            "verify",
            "--suite",
            "delayed-pa",
            "--n",
            "3",
            "--npa",
            "1",
            "--prior",
            "random:4",
        ],
        vec![
            "verify",
            "--suite",
            "preimage-uniformity",
            "--n",
            "6",
            "--npa",
            "2",
            "--draws",
            "4000",
            "--seed",
            "1",
        ],
    ] {
        let r = dpa(&args);
        assert_eq!(r.code, 0, "{args:?}: {}", r.stdout);
        let j = r.json();
        assert_valid(&v, &j);
        assert_eq!(j["pass"], true);
    }
    let j = dpa(&["verify", "--suite", "table1"]).json();
    assert_eq!(
        (
            j["details"]["cases"].as_u64(),
            j["details"]["passed"].as_u64()
        ),
        (Some(8), Some(8))
    );
}

#[test]
fn custom_bank_is_used() {
    let dir = TempDir::new().unwrap();
    let bank = dir.path().join("bank.json");
    std::fs::write(
        &bank,
        r#"[{"name": "b0", "kind": "bit", "index": 0}, {"name": "leaky", "kind": "noisy-copy", "flip": 0.2}]"#,
    )
    .unwrap();
    let r = dpa(&[
        "verify",
        "--suite",
        "delayed-pa",
        "--n",
        "3",
        "--npa",
        "2",
        "--bank",
        bank.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    let j = r.json();
    assert_eq!(
        j["details"]["classical_models"],
        serde_json::json!(["b0", "leaky"])
    );
    assert_eq!(j["details"]["classical"]["models"], 2);
}

#[test]
fn sweep_writes_rows_in_grid_order() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let args = [
        "sweep",
        "dqkd",
        "--n",
        "600",
        "--fwd",
        "0,0.03",
        "--bwd",
        "0.01",
        "--repeats",
        "2",
        "--seed",
        "4",
        "--out",
    ];
    let mut a: Vec<&str> = args.to_vec();
    a.push(out.to_str().unwrap());
    assert_eq!(dpa(&a).code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let indices: Vec<&str> = rows.iter().map(|r| &r[col("index")]).collect();
    assert_eq!(indices, ["0", "1", "2", "3"]);
    let forward: Vec<&str> = rows.iter().map(|r| &r[col("forward")]).collect();
    assert_eq!(forward, ["bsc:0", "bsc:0", "bsc:0.03", "bsc:0.03"]);
    assert_ne!(rows[0][col("seed")], rows[1][col("seed")]);

    // same root seed, same table
    let again = dpa(&[
        "sweep",
        "dqkd",
        "--n",
        "600",
        "--fwd",
        "0,0.03",
        "--bwd",
        "0.01",
        "--repeats",
        "2",
        "--seed",
        "4",
    ]);
    assert_eq!(again.stdout, text);
}

#[test]
fn pa_round_trip() {
    let dir = TempDir::new().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let (matrix, seed, raw, msg, session) = (
        path("A.txt"),
        path("S.txt"),
        path("a.txt"),
        path("m.txt"),
        path("s.json"),
    );

    let r = dpa(&[
        "pa",
        "toeplitz",
        "--n",
        "16",
        "--npa",
        "6",
        "--seed",
        "4",
        "--out",
        &matrix,
        "--seed-out",
        &seed,
    ]);
    assert_eq!(r.code, 0);
    let text = std::fs::read_to_string(&matrix).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "rows=6 cols=16");
    let seed_bits: Vec<char> = {
        let t = std::fs::read_to_string(&seed).unwrap();
        let mut l = t.lines();
        assert_eq!(l.next(), Some("bits=21"));
        let hex = l.next().unwrap();
        (0..21)
            .map(|i| {
                let nibble = hex.as_bytes()[i / 4] as char;
                if nibble.to_digit(16).unwrap() >> (i % 4) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    };
    // A[i][j] = seed[i − j + n − 1]
    for (i, row) in rows[1..].iter().enumerate() {
        for (j, c) in row.chars().enumerate() {
            assert_eq!(c, seed_bits[i + 15 - j]);
        }
    }

    std::fs::write(&raw, "bits=16\nb3a5\n").unwrap();
    std::fs::write(&msg, "bits=6\n21\n").unwrap();
    let by_matrix = dpa(&["pa", "apply", "--matrix", &matrix, "--input", &raw]);
    let by_seed = dpa(&[
        "pa",
        "apply",
        "--toeplitz-seed",
        &seed,
        "--n",
        "16",
        "--npa",
        "6",
        "--input",
        &raw,
    ]);
    assert_eq!(by_matrix.code, 0);
    assert_eq!(by_matrix.stdout, by_seed.stdout);
    assert!(by_matrix.stdout.starts_with("bits=6\n"));

    let r = dpa(&[
        "pa",
        "encrypt",
        "--matrix",
        &matrix,
        "--raw-key",
        &raw,
        "--message",
        &msg,
        "--seed",
        "3",
        "--out",
        &session,
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let dump: Value = serde_json::from_str(&std::fs::read_to_string(&session).unwrap()).unwrap();
    assert_valid(&validator("session"), &dump);

    let r = dpa(&["pa", "recover", "--session", &session]);
    assert_eq!(r.code, 0);
    let j = r.json();
    assert_eq!(j["recovered"], true);
    assert_eq!(j["via_key"], serde_json::json!({"bits": 6, "hex": "21"}));

    let tampered = std::fs::read_to_string(&session)
        .unwrap()
        .replace("\"selector_seed\": 3", "\"selector_seed\": 4");
    std::fs::write(&session, tampered).unwrap();
    assert_eq!(dpa(&["pa", "recover", "--session", &session]).code, 3);
}
