//! End-to-end checks of the courierctl binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_courierctl"))
}

#[test]
fn run_default_scenario_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = bin()
        .args(["run", "--seed", "11", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["orders_total"], 1);
    assert_eq!(report["orders_vb1"], 1);
}

#[test]
fn run_with_config_file_and_active_adversary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 3, "adversary": "drop"}"#).unwrap();
    let out = dir.path().join("report.json");
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    // Dropped traffic means no deliveries, which is exactly what the
    // active-adversary assertion demands.
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["orders_delivered"], 0);
}

#[test]
fn invalid_config_exits_with_error_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"adversary": "mitm"}"#).unwrap();
    let status = bin().args(["run", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn attack_suite_all_exits_zero() {
    let output = bin()
        .args(["attack", "--suite", "all", "--seed", "5"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    let rejected_lines = stdout
        .lines()
        .filter(|line| line.contains(": rejected ("))
        .count();
    assert_eq!(rejected_lines, 7);
}

#[test]
fn attack_unknown_name_fails() {
    let status = bin()
        .args(["attack", "--suite", "replay,mitm"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn bench_small_counts_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let status = bin()
        .args(["bench", "--orders", "2,4", "--seed", "7", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    assert_eq!(report["flat"], true);
}

#[test]
fn bench_rejects_non_ascending_counts() {
    let status = bin().args(["bench", "--orders", "4,2"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}
