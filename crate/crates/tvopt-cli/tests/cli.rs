//! End-to-end tests of the command-line interface: exit codes, CSV
//! schemas, determinism, and the certificate calculator.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_tvopt")
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("tvopt-cli-tests").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(binary()).args(args).output().unwrap()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

const SCALAR_RUN: &str = r#"{
  "scenario": {"kind": "scalar"},
  "grid": {"h": 0.1, "steps": 250},
  "solver": {"algorithm": "ufopc", "alpha": 0.56, "beta": 0.56,
             "prediction_steps": 1, "correction_steps": 3, "gamma": 0.0}
}"#;

#[test]
fn run_writes_the_expected_csv() {
    let dir = workdir("run-smoke");
    let config = write_config(&dir, "config.json", SCALAR_RUN);
    let output = run(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("asymptotic error"));
    assert!(text.contains("regime: global_oh"));

    let csv = fs::read_to_string(dir.join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,t,error,pred_error,certified_envelope"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 250, "one row per grid step");
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 5);
        let error: f64 = fields[2].parse().unwrap();
        assert!(error.is_finite());
        assert!(
            !fields[4].is_empty(),
            "certified run fills the envelope column"
        );
    }
}

#[test]
fn run_outputs_are_byte_deterministic() {
    let dir_a = workdir("determinism-a");
    let dir_b = workdir("determinism-b");
    let config_a = write_config(&dir_a, "config.json", SCALAR_RUN);
    for dir in [&dir_a, &dir_b] {
        let output = run(&[
            "run",
            "--config",
            config_a.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--seed",
            "9",
        ]);
        assert_eq!(output.status.code(), Some(0));
    }
    let a = fs::read(dir_a.join("run.csv")).unwrap();
    let b = fs::read(dir_b.join("run.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn missing_scenario_key_exits_with_config_error() {
    let dir = workdir("bad-config");
    let config = write_config(&dir, "config.json", r#"{"grid": {"h": 0.1}}"#);
    let output = run(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("scenario"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = workdir("unknown-key");
    let config = write_config(
        &dir,
        "config.json",
        r#"{"scenario": {"kind": "scalar"}, "stepsize": 0.5}"#,
    );
    let output = run(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("stepsize"));
}

#[test]
fn oversized_stepsize_leaves_envelope_empty_or_diverges() {
    let dir = workdir("uncertified");
    let config = write_config(
        &dir,
        "config.json",
        r#"{
            "scenario": {"kind": "scalar"},
            "grid": {"h": 0.1, "steps": 100},
            "solver": {"algorithm": "ufopc", "alpha": 10.0, "beta": 0.56,
                       "prediction_steps": 1, "correction_steps": 3, "gamma": 0.0}
        }"#,
    );
    let output = run(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    let code = output.status.code().unwrap();
    assert!(code == 0 || code == 2, "completes or diverges, got {code}");
    let csv = fs::read_to_string(dir.join("run.csv")).unwrap();
    for row in csv.lines().skip(1) {
        assert!(
            row.ends_with(','),
            "uncertified run leaves the envelope empty: {row}"
        );
    }
}

const SCALAR_SWEEP: &str = r#"{
  "scenario": {"kind": "scalar"},
  "solver": {"algorithm": "ufopc", "alpha": 0.56, "beta": 0.56, "correction_steps": 3, "gamma": 0.0},
  "sweep": {
    "h_list": [0.05, 0.1, 0.2, 0.4],
    "horizon_periods": 10,
    "variants": [
      {"label": "running", "prediction_steps": 0},
      {"label": "exact_prediction", "prediction_steps": "exact"}
    ]
  }
}"#;

#[test]
fn sweep_emits_rows_per_variant_and_period() {
    let dir = workdir("sweep-smoke");
    let config = write_config(&dir, "config.json", SCALAR_SWEEP);
    let output = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("running: slope"));
    assert!(text.contains("exact_prediction: slope"));

    let csv = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "variant,h,asymptotic_error,slope_contrib,P,C,certified"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8, "two variants, four periods");
    assert!(rows[0].starts_with("running,"));
    assert!(rows[4].starts_with("exact_prediction,"));
}

#[test]
fn sweep_without_periods_exits_with_config_error() {
    let dir = workdir("sweep-empty");
    let config = write_config(&dir, "config.json", r#"{"scenario": {"kind": "scalar"}}"#);
    let output = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("h_list"));
}

#[test]
fn budgeted_sweep_allocates_counts_from_the_timing_model() {
    let dir = workdir("sweep-budget");
    let config = write_config(
        &dir,
        "config.json",
        r#"{
            "scenario": {"kind": "vector", "n": 8, "seed": 5},
            "solver": {"algorithm": "cfopc", "alpha": 0.25, "beta": 0.02},
            "sweep": {"h_list": [0.006, 0.022, 0.04], "horizon_periods": 1}
        }"#,
    );
    let output = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--budget",
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let csv = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    let find = |variant: &str, h: f64| -> Vec<String> {
        csv.lines()
            .find(|row| {
                row.starts_with(variant)
                    && row
                        .split(',')
                        .nth(1)
                        .and_then(|f| f.parse::<f64>().ok())
                        .is_some_and(|v| (v - h).abs() < 1e-12)
            })
            .unwrap_or_else(|| panic!("row {variant}@{h} missing"))
            .split(',')
            .map(str::to_owned)
            .collect()
    };
    // prediction unaffordable below the overhead threshold
    let row = find("prediction_correction", 0.006);
    assert_eq!(row[2], "", "no error recorded when unaffordable");
    assert_eq!(row[4], "", "no prediction count when unaffordable");
    // printed allocation tuples
    let row = find("prediction_correction", 0.022);
    assert_eq!(row[4], "1");
    assert_eq!(row[5], "14");
    let row = find("prediction_correction", 0.04);
    assert_eq!(row[4], "16");
    assert_eq!(row[5], "26");
    let row = find("total_correction", 0.04);
    assert_eq!(row[5], "52");
    let row = find("correction_extra", 0.006);
    assert_eq!(row[5], "3");
}

#[test]
fn bounds_reproduces_the_printed_rate() {
    let output = run(&[
        "bounds", "--m", "1", "--L", "2.53", "--alpha", "0.56", "--beta", "0.56", "--P", "1",
        "--C", "3", "--gamma", "0",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    let tau0 = json["tau0"].as_f64().unwrap();
    assert!((tau0 - 0.160).abs() < 1e-3, "tau0 = {tau0}");
    assert_eq!(json["regime"], "global_oh");
}

#[test]
fn bounds_without_correction_reports_no_certificate() {
    let output = run(&[
        "bounds", "--m", "1", "--L", "2.53", "--alpha", "0.56", "--beta", "0.56", "--P", "0",
        "--C", "0",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(json["regime"], "no_certificate");
}

#[test]
fn bounds_quadratic_case_reports_unbounded_region() {
    let output = run(&[
        "bounds", "--m", "1", "--L", "2.53", "--alpha", "0.56", "--beta", "0.56", "--P", "1",
        "--C", "3", "--gamma", "0", "--C1", "0",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(json["r_bar"], "inf");
    assert_eq!(json["h_bar"], "inf");
}

#[test]
fn shipped_configs_parse_and_run() {
    let dir = workdir("shipped-configs");
    let repo_configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    // quick scaled-down pass over the dispatch config; the heavier
    // sweep configs are exercised by the acceptance suite logic
    let output = run(&[
        "run",
        "--config",
        repo_configs.join("der_dispatch.json").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let csv = fs::read_to_string(dir.join("run.csv")).unwrap();
    assert_eq!(csv.lines().count(), 400, "header plus one row per step");
}
