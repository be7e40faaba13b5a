use std::process::{Command, Output};

use dps_qkd::AttackMatrix;

fn dpsqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpsqkd")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn thresholds_text_output() {
    let o = dpsqkd(&["thresholds", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "BB84 0.1100\nIND  0.0609\nDPS  0.0412\n");
}

#[test]
fn error_probs_identity_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("id.json");
    AttackMatrix::identity(3).write_file(&path).unwrap();
    let o = dpsqkd(&["error-probs", "--attack", path.to_str().unwrap(), "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("slot,occupancy,p_b_closed,p_p_closed,p_b_oracle,p_p_oracle,discrepancy\n"));
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(&fields[2..6], ["0", "0", "0", "0"], "{line}");
    }
}

#[test]
fn malformed_attack_file_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"n\": 2,\n  \"entries\": [[1, 0], [0, 0],\n  [0 0]]\n}\n").unwrap();
    let o = dpsqkd(&["error-probs", "--attack", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn config_file_supplies_defaults_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rates.csv");
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!("# figure sweep\nlosses = 0, 30\nn_list = 3\nout = {}\n", out.display()),
    )
    .unwrap();
    let o = dpsqkd(&["keyrate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let table = std::fs::read_to_string(&out).unwrap();
    assert_eq!(table.lines().count(), 1 + 3 * 2);
}

#[test]
fn validation_errors_exit_one() {
    for args in [
        &["verify-bound", "--samples", "0"][..],
        &["keyrate", "--dark", "1.5"],
        &["keyrate", "--ec-efficiency", "0.5"],
        &["simulate", "--kind", "identity", "--test-fraction", "1"],
        &["simulate", "--kind", "rotate"],
        &["simulate", "--kind", "identity", "--blocks", "0"],
        &["error-probs"],
        &["nonsense"],
    ] {
        let o = dpsqkd(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(dpsqkd(&["--help"]).status.code(), Some(0));
    assert_eq!(dpsqkd(&["--version"]).status.code(), Some(0));
    assert_eq!(dpsqkd(&["simulate", "--help"]).status.code(), Some(0));
}

#[test]
fn simulate_feedback_emits_schedule_trace() {
    let o = dpsqkd(&[
        "simulate", "--kind", "swap,identity", "--schedule", "feedback", "--blocks", "1000",
        "--repetitions", "0", "--format", "text",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let trace = doc["summary"]["schedule_trace"].as_array().unwrap();
    assert_eq!(trace.len(), 2);
    assert_eq!(trace[1]["matrix"], 1);
}

#[test]
fn verify_bound_text_report_contains_best_matrix() {
    let o = dpsqkd(&["verify-bound", "--n", "3", "--samples", "500", "--optimize", "--restarts", "2", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let m = &doc["best_matrix"];
    let parsed = AttackMatrix::from_json_str(&m.to_string()).unwrap();
    assert_eq!(parsed.n(), 3);
    assert_eq!(doc["restart_traces"].as_array().unwrap().len(), 2);
    assert_eq!(doc["counterexample"], false);
}
