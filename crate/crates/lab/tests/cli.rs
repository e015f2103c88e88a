//! End-to-end tests of the `psgd-lab` binary: exit codes, artifact
//! emission, determinism, and flag/config precedence.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psgd-lab"))
}

fn write_config(dir: &Path, json: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL_RUN: &str = r#"{
    "problem": {"kind": "example41"},
    "schedule": {"kind": "constant", "alpha": 0.1},
    "steps": 40,
    "seeds": 4,
    "master_seed": 3
}"#;

#[test]
fn run_subcommand_emits_artifacts_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_RUN);
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["run", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    let text = stdout(&out);
    assert!(out.status.success(), "stdout: {text}\nstderr: {}", stderr(&out));
    assert!(text.contains("[PASS]"), "stdout: {text}");
    assert!(text.lines().last().unwrap().starts_with("OK:"), "stdout: {text}");
    for artifact in [
        "series.csv",
        "intervals.csv",
        "run.svg",
        "summary.json",
        "resolved_config.json",
    ] {
        assert!(out_dir.join(artifact).exists(), "missing {artifact}");
    }
}

#[test]
fn reruns_with_the_same_master_seed_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_RUN);
    for out_dir in ["a", "b"] {
        let out = bin()
            .args([
                "run",
                config.to_str().unwrap(),
                "--out",
                dir.path().join(out_dir).to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    for name in ["series.csv", "intervals.csv", "summary.json", "run.svg"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical invocations");
    }
}

#[test]
fn flags_override_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_RUN);
    let out_dir = dir.path().join("out");
    let out = bin()
        .args([
            "run",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seeds",
            "2",
            "--master-seed",
            "9",
            "--h",
            "0.002",
            "--threads",
            "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let resolved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("resolved_config.json")).unwrap())
            .unwrap();
    assert_eq!(resolved["seeds"], 2);
    assert_eq!(resolved["master_seed"], 9);
    assert_eq!(resolved["flow_step"], 0.002);
}

#[test]
fn missing_config_fails_with_path_in_message() {
    let out = bin().args(["run", "/nonexistent/config.json"]).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("/nonexistent/config.json"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_keys_are_rejected_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "problem": {"kind": "example41"},
            "schedule": {"kind": "constant", "alpha": 0.1},
            "steps": 5,
            "sedes": 3
        }"#,
    );
    let out = bin().args(["run", config.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("sedes"), "stderr: {err}");
    // The parse error carries path:line:column.
    assert!(err.contains("config.json:"), "stderr: {err}");
}

#[test]
fn schedule_mismatch_is_an_error_not_a_failed_check() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_RUN);
    let out = bin()
        .args(["robbins-monro", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("harmonic"), "stderr: {}", stderr(&out));
    assert!(!stdout(&out).contains("[FAIL]"), "errors should not print check lines");
}

#[test]
fn failed_checks_exit_nonzero() {
    // Far too short a horizon for the Goldstein tail to settle: the
    // trajectory stays interior where the measure is near one.
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "problem": {"kind": "example41"},
            "schedule": {"kind": "constant", "alpha": 0.01},
            "steps": 40,
            "seeds": 4,
            "master_seed": 0
        }"#,
    );
    let out = bin()
        .args([
            "example41",
            config.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let text = stdout(&out);
    assert!(text.contains("[FAIL] goldstein_tail_vanishes"), "stdout: {text}");
    assert!(text.lines().last().unwrap().starts_with("FAILED:"), "stdout: {text}");
}

#[test]
fn constants_subcommand_prints_both_json_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_RUN);
    let out = bin()
        .args([
            "constants",
            config.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("\"c1\""), "stdout: {text}");
    assert!(text.contains("\"weighted_measure_bound\""), "stdout: {text}");
}
