use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn depbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depbound")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_spec(dir: &Path, kappa: f64) -> String {
    let path = dir.join("spec.json");
    let spec = format!(
        r#"{{"kind": "linear", "coefficients": {{"kind": "geometric", "kappa": {kappa}}}, "innovation": {{"kind": "standard_gaussian"}}}}"#
    );
    fs::write(&path, spec).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn list_bounds_json_names_every_calculator() {
    let out = depbound(&["list-bounds", "--json"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 14);
    assert!(entries.iter().any(|e| e["id"] == "matrix_bernstein_tau"));
}

#[test]
fn bound_evaluates_from_params() {
    let out = depbound(&[
        "bound", "merlevede", "--json", "--param", "n=100", "--param", "x=30", "--param", "sigma2=1", "--param", "b=1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["bound_id"], "merlevede");
    let clamped = v["clamped"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&clamped));
}

#[test]
fn nonstationary_spec_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), 1.5);
    let out = depbound(&["measure", "--spec", &spec, "--max-lag", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1.5"));
}

#[test]
fn unknown_bound_exits_with_validation_code() {
    let out = depbound(&["bound", "no_such_bound", "--param", "n=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analytic_measure_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), 0.5);
    let out = depbound(&["measure", "--spec", &spec, "--max-lag", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6, "{text}");
}

#[test]
fn empty_scenario_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("empty.json");
    fs::write(&scenario, r#"{"schema_version": 1, "name": "empty"}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = depbound(&["run", scenario.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 0);
}

#[test]
fn manifest_rerun_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    fs::write(
        &scenario,
        r#"{"schema_version": 1, "name": "s", "seed": 3, "reps": 1000,
            "spec": {"kind": "linear", "coefficients": {"kind": "geometric", "kappa": 0.4}, "innovation": {"kind": "rademacher"}},
            "tasks": [
              {"task": "measure", "method": "monte_carlo", "max_lag": 3},
              {"task": "counterexample", "d": [20], "kappa": 0.5, "m": 1}
            ]}"#,
    )
    .unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    assert!(depbound(&["run", scenario.to_str().unwrap(), "--out", first.to_str().unwrap()]).status.success());
    let manifest = first.join("manifest.json");
    let out = depbound(&["run", "--manifest", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["task_00_measure.json", "task_00_measure.csv", "task_01_counterexample.json", "task_01_counterexample.csv"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
}
