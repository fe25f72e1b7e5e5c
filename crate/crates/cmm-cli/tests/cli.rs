//! End-to-end tests driving the `cmm` binary against the shipped model
//! files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn model(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name);
    path.to_str().unwrap().to_string()
}

fn cmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_accepts_all_shipped_models() {
    for name in [
        "classical_uniform4.json",
        "qubit.json",
        "two_qubit.json",
        "instrument_witness.json",
        "measure_coin.json",
    ] {
        let out = cmm(&["validate", "--model", &model(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
        assert!(stdout(&out).contains("is valid"));
    }
}

#[test]
fn validate_reports_trace_failure_with_residual() {
    let dir = std::env::temp_dir().join("cmm-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trace09.json");
    std::fs::write(
        &path,
        r#"{"kind":"von_neumann",
            "states":{"bad":{"matrix":[[[0.45,0],[0,0]],[[0,0],[0.45,0]]]}},
            "observables":{"sz":[[[1,0],[0,0]],[[0,0],[-1,0]]]}}"#,
    )
    .unwrap();
    let out = cmm(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("trace = 1"), "stderr: {err}");
    assert!(err.contains("1.000e-1"), "stderr: {err}");
}

#[test]
fn validate_names_the_negative_point() {
    let dir = std::env::temp_dir().join("cmm-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("negweight.json");
    std::fs::write(
        &path,
        r#"{"kind":"classical","points":["a","b"],"weights":[1.2,-0.2],
            "variables":{"x":[0,1]}}"#,
    )
    .unwrap();
    let out = cmm(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("weight of point `b`"), "stderr: {err}");
}

#[test]
fn diagnose_reproduces_the_classical_table() {
    let out = cmm(&["diagnose", "--model", &model("classical_uniform4.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("violation of FTP: no"));
    assert!(text.contains("order effect: no"));
    assert!(text.contains("replicability: yes"));
    assert!(text.contains("RRE: yes"));
    assert!(text.contains("violation of Bell inequality: no"));
}

#[test]
fn diagnose_reproduces_the_projective_table() {
    let out = cmm(&["diagnose", "--model", &model("qubit.json"), "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("violation of FTP: yes"));
    assert!(text.contains("order effect: yes"));
    assert!(text.contains("replicability: yes"));
    assert!(text.contains("RRE: no"));
    assert!(text.contains("OE+RRE: no"));
    assert!(text.contains("violation of Bell inequality: yes"));
}

#[test]
fn diagnose_finds_oe_rre_on_the_witness_instruments() {
    let out = cmm(&[
        "diagnose",
        "--model",
        &model("instrument_witness.json"),
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("OE+RRE: yes"), "table: {text}");
}

#[test]
fn diagnose_requires_seed_for_quantum_models() {
    let out = cmm(&["diagnose", "--model", &model("qubit.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn diagnose_accepts_a_named_context_subset() {
    // From the sz-eigenstate alone (plus the model-level Bell row), the
    // order effect between sx and sz is still visible.
    let out = cmm(&[
        "diagnose",
        "--model",
        &model("qubit.json"),
        "--contexts",
        "zero",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("order effect: yes"));
    assert!(text.contains("context zero"));
}

#[test]
fn tolerance_overrides_change_detection_thresholds() {
    // Raising the order-effect threshold above the maximal discrepancy
    // flips the OE row.
    let out = cmm(&[
        "diagnose",
        "--model",
        &model("qubit.json"),
        "--contexts",
        "zero",
        "--seed",
        "5",
        "--tol",
        "eps_oe=0.9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).contains("order effect: no"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn interference_sweep_matches_the_projective_values() {
    let out = cmm(&[
        "interference",
        "--model",
        &model("qubit.json"),
        "--a",
        "sx",
        "--b",
        "sz",
        "--y",
        "1",
        "--sweep",
        "4",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "parameter,delta,cross_delta,lambda,theta,regime");
    // t = 0 is |0>: delta = 1/2, trigonometric with theta = 0.
    let first: Vec<&str> = rows[1].split(',').collect();
    let delta: f64 = first[1].parse().unwrap();
    assert!((delta - 0.5).abs() < 1e-9, "row: {}", rows[1]);
    assert_eq!(first[5], "trigonometric");
    // t = pi/4 is |+>, an eigenstate of the conditioning observable:
    // delta = 0 and the square-root factors collapse.
    let second: Vec<&str> = rows[2].split(',').collect();
    let delta2: f64 = second[1].parse().unwrap();
    assert!(delta2.abs() < 1e-9, "row: {}", rows[2]);
}

#[test]
fn interference_on_classical_models_is_identically_zero() {
    let out = cmm(&[
        "interference",
        "--model",
        &model("classical_uniform4.json"),
        "--a",
        "parity",
        "--b",
        "low",
        "--y",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines().skip(1) {
        // Context labels may be quoted CSV fields containing commas; the
        // numeric columns sit at fixed positions from the end.
        let delta: f64 = line.rsplit(',').nth(4).unwrap().parse().unwrap();
        assert!(delta.abs() < 1e-12, "line: {line}");
    }
}

#[test]
fn chsh_evaluates_the_singlet_witness_configuration() {
    let out = cmm(&[
        "chsh",
        "--model",
        &model("two_qubit.json"),
        "--context",
        "singlet",
        "--a1",
        "az",
        "--a2",
        "ax",
        "--b1",
        "b_sum",
        "--b2",
        "b_diff",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let value: f64 = text
        .lines()
        .next()
        .unwrap()
        .split(" = ")
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((value - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-6);
}

#[test]
fn chsh_maximizer_reaches_tsirelson() {
    let out = cmm(&[
        "chsh",
        "--model",
        &model("two_qubit.json"),
        "--seed",
        "11",
        "--restarts",
        "8",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let value = record["outputs"]["value"].as_f64().unwrap();
    assert!((value - 2.8284271247461903).abs() < 1e-2, "value {value}");
}

#[test]
fn chsh_incompatible_quadruple_is_a_precondition_failure() {
    let out = cmm(&[
        "chsh",
        "--model",
        &model("qubit.json"),
        "--context",
        "zero",
        "--a1",
        "sz",
        "--a2",
        "sx",
        "--b1",
        "sz",
        "--b2",
        "sx",
    ]);
    assert_eq!(out.status.code(), Some(3));
    // --force computes the sequential expression instead.
    let out = cmm(&[
        "chsh",
        "--model",
        &model("qubit.json"),
        "--context",
        "zero",
        "--a1",
        "sz",
        "--a2",
        "sx",
        "--b1",
        "sz",
        "--b2",
        "sx",
        "--force",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("sequential CHSH"));
}

#[test]
fn entangle_reports_maximal_concurrence_on_the_singlet() {
    let out = cmm(&[
        "entangle",
        "--model",
        &model("two_qubit.json"),
        "--context",
        "singlet",
        "--a",
        "az",
        "--b",
        "bz",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let conc = record["outputs"]["concurrence"]["value"].as_f64().unwrap();
    assert!((conc - 2.0).abs() < 1e-9);
    let epr = record["outputs"]["epr"].as_array().unwrap();
    let anti = epr
        .iter()
        .find(|e| e["gamma"] == serde_json::json!([[0, 1], [1, 0]]))
        .unwrap();
    assert_eq!(anti["holds"], serde_json::json!(true));
    assert_eq!(anti["complete"], serde_json::json!(true));
}

#[test]
fn sample_concentrates_on_the_fair_coin() {
    let out = cmm(&[
        "sample",
        "--model",
        &model("classical_uniform4.json"),
        "--context",
        "omega",
        "--a",
        "parity",
        "--trials",
        "100000",
        "--seed",
        "42",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let freqs = record["outputs"]["frequencies"].as_array().unwrap();
    for f in freqs {
        assert!((f.as_f64().unwrap() - 0.5).abs() < 0.01);
    }
}

#[test]
fn sample_requires_a_seed() {
    let out = cmm(&[
        "sample",
        "--model",
        &model("classical_uniform4.json"),
        "--context",
        "omega",
        "--a",
        "parity",
        "--trials",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sequential_sample_reports_the_combinability_mismatch() {
    let out = cmm(&[
        "sample",
        "--model",
        &model("qubit.json"),
        "--context",
        "zero",
        "--a",
        "sx",
        "--b",
        "sz",
        "--trials",
        "100000",
        "--seed",
        "42",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let comb = &record["outputs"]["combinability"];
    assert_eq!(comb["marginals_match"], serde_json::json!(false));
    let residual = comb["max_residual"].as_f64().unwrap();
    assert!((residual - 0.5).abs() < 0.02, "residual {residual}");
}

#[test]
fn records_round_trip_and_are_bit_reproducible() {
    let args = [
        "diagnose",
        "--model",
        &model("qubit.json"),
        "--seed",
        "7",
        "--format",
        "json",
    ];
    let first = cmm(&args);
    let second = cmm(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(
        stdout(&first),
        stdout(&second),
        "diagnose is not reproducible"
    );
    let record: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    for key in [
        "tool_version",
        "command",
        "model_digest",
        "inputs",
        "outputs",
    ] {
        assert!(record.get(key).is_some(), "record missing {key}");
    }
    // Round-trip through the schema reproduces the serialized form.
    let reserialized = serde_json::to_string(&record).unwrap();
    let reparsed: serde_json::Value = serde_json::from_str(&reserialized).unwrap();
    assert_eq!(record, reparsed);
}

#[test]
fn csv_output_writes_sequences_to_file() {
    let dir = std::env::temp_dir().join("cmm-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("seq.csv");
    let out = cmm(&[
        "sample",
        "--model",
        &model("classical_uniform4.json"),
        "--context",
        "omega",
        "--a",
        "parity",
        "--trials",
        "5",
        "--seed",
        "1",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("trial,outcome\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn measure_model_runs_through_the_generic_commands() {
    let out = cmm(&[
        "sample",
        "--model",
        &model("measure_coin.json"),
        "--context",
        "loaded",
        "--a",
        "coin",
        "--trials",
        "100000",
        "--seed",
        "3",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let freqs = record["outputs"]["frequencies"].as_array().unwrap();
    assert!((freqs[0].as_f64().unwrap() - 0.7).abs() < 0.01);
}
