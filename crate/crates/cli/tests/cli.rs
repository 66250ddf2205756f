//! Runs the `sdisc` binary against the bundled models.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn sdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdisc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_reports_the_quartic_invariants() {
    let q = model("quartic.json");
    let v = json_stdout(&sdisc(&["analyze", path_str(&q)]));
    assert_eq!(v["k0"], 2);
    assert_eq!(v["indQ"], 1);
    assert_eq!(v["N"], 8);
    assert_eq!(v["l0_refined"], 4);
    assert_eq!(v["admissible"], true);
}

#[test]
fn degenerate_model_is_reported_not_rejected() {
    let d = model("degenerate_quartic.json");
    let v = json_stdout(&sdisc(&["analyze", path_str(&d)]));
    assert_eq!(v["admissible"], false);
    assert_eq!(v["reason"], "Q^v vanishes on bΔ");
    let out = sdisc(&["indices", path_str(&d), "--trials", "8"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_inputs_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"terms\": [").unwrap();
    assert_eq!(sdisc(&["analyze", path_str(&bad)]).status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    assert_eq!(sdisc(&["analyze", path_str(&missing)]).status.code(), Some(2));

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command":"analyze","nff":32}"#).unwrap();
    let out = sdisc(&["--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));

    let q = model("quartic.json");
    assert_eq!(sdisc(&["attach", path_str(&q), "--nf", "4"]).status.code(), Some(2));
    assert_eq!(sdisc(&["attach", path_str(&q), "--grid", "ring:2"]).status.code(), Some(2));
    assert_eq!(sdisc(&["nonsense", path_str(&q)]).status.code(), Some(2));
}

#[test]
fn attach_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("zero.json");
    let q = model("quartic.json");
    let out = sdisc(&["attach", path_str(&q), "--nf", "32", "--out", path_str(&out_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let member = &report["members"][0];
    assert_eq!(member["converged"], true);
    assert!(member["residual"].as_f64().unwrap() < 1e-9);
    let csv = std::fs::read_to_string(out_path.with_extension("csv")).unwrap();
    assert!(csv.starts_with("index,x0,"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let body = serde_json::json!({
        "command": "attach",
        "model": model("quartic.json"),
        "nf": 4,
    });
    std::fs::write(&cfg, body.to_string()).unwrap();
    assert_eq!(sdisc(&["--config", path_str(&cfg)]).status.code(), Some(2));
    let v = json_stdout(&sdisc(&["--config", path_str(&cfg), "--nf", "32"]));
    assert_eq!(v["nf"], 32);
}

#[test]
fn huge_perturbation_exits_with_3() {
    let q = model("quartic.json");
    let theta = model("theta_huge.json");
    let out = sdisc(&["attach", path_str(&q), "--nf", "24", "--theta", path_str(&theta)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reduce t"));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["members"][0]["converged"], false);
}

#[test]
fn outputs_are_reproducible() {
    let q = model("tilted_quartic.json");
    for cmd in ["analyze", "indices", "jet-bound"] {
        let a = sdisc(&[cmd, path_str(&q), "--seed", "7"]);
        let b = sdisc(&[cmd, path_str(&q), "--seed", "7"]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn jet_bound_and_indices_agree_on_the_tilted_model() {
    let q = model("tilted_quartic.json");
    let bound = json_stdout(&sdisc(&["jet-bound", path_str(&q)]));
    let idx = json_stdout(&sdisc(&["indices", path_str(&q)]));
    assert_eq!(bound["ind_q"], 2);
    assert_eq!(idx["partial_indices"], serde_json::json!([1, 1]));
    assert_eq!(bound["partial_indices"], idx["partial_indices"]);
}
