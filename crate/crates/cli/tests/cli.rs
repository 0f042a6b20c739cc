//! Process-level checks: exit codes, reproducibility of records across runs,
//! and `analyze` agreeing with the run that produced the records.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_verdict"))
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn verdict")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = run(&["solve", "--config", "/nonexistent.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_flag_value_is_a_usage_error() {
    let config = workspace().join("configs/court_tiny.toml");
    let out = run(&["solve", "--config", config.to_str().unwrap(), "--engine", "quantum"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corrupt_records_are_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.jsonl");
    std::fs::write(&path, "{\"record_version\": 1\nnot json\n").unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_reports_court_tiny_value() {
    let config = workspace().join("configs/court_tiny.toml");
    let out = run(&["solve", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("expected X value: -1"));
}

#[test]
fn simulate_then_analyze_print_the_same_summary() {
    let config = workspace().join("configs/benchmark.toml");
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.jsonl");
    let sim = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        records.to_str().unwrap(),
    ]);
    assert_eq!(sim.status.code(), Some(0), "{}", String::from_utf8_lossy(&sim.stderr));
    let ana = run(&["analyze", records.to_str().unwrap()]);
    assert_eq!(ana.status.code(), Some(0), "{}", String::from_utf8_lossy(&ana.stderr));
    // analyze recomputes exactly the table and p-values simulate printed
    let sim_summary: Vec<String> = stdout(&sim)
        .lines()
        .filter(|l| !l.starts_with("wrote "))
        .map(|l| l.trim_end().to_string())
        .collect();
    let ana_summary: Vec<String> =
        stdout(&ana).lines().map(|l| l.trim_end().to_string()).collect();
    assert_eq!(sim_summary, ana_summary);
}

#[test]
fn empty_records_file_gives_an_empty_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.jsonl");
    std::fs::write(&path, "").unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("(no records)"));
}

#[test]
fn tampered_verdict_triggers_a_replay_warning() {
    let config = workspace().join("configs/benchmark.toml");
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.jsonl");
    let sim = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        records.to_str().unwrap(),
    ]);
    assert_eq!(sim.status.code(), Some(0));
    let text = std::fs::read_to_string(&records).unwrap();
    let tampered = text.replacen("\"verdict\":\"one\"", "\"verdict\":\"zero\"", 1);
    assert_ne!(text, tampered, "expected at least one conclusive verdict to flip");
    std::fs::write(&records, tampered).unwrap();
    let out = run(&["analyze", records.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replay mismatch"));
}

#[test]
fn mock_replicate_court_is_byte_reproducible_across_processes() {
    let fixtures = workspace().join("fixtures");
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for name in ["a.jsonl", "b.jsonl"] {
        let path = dir.path().join(name);
        let out = run(&[
            "replicate-court",
            "--backend",
            "mock",
            "--fixtures",
            fixtures.to_str().unwrap(),
            "--matches",
            "2",
            "--seed",
            "99",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        outs.push((std::fs::read(&path).unwrap(), stdout(&out)));
    }
    assert_eq!(outs[0].0, outs[1].0, "record files differ between runs");
    assert_eq!(outs[0].1.replace("a.jsonl", ""), outs[1].1.replace("b.jsonl", ""));
}
