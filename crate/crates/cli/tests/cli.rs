//! End-to-end checks of the command-line interface.

use std::process::Command;

fn streamkin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_streamkin"))
}

#[test]
fn synth_then_run_produces_report_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sample.csv");

    let out = streamkin()
        .args(["synth", "--n", "60", "--lambda", "step:5,300", "--seed", "11"])
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "synth failed: {out:?}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("r,theta,y,sigma"));
    assert_eq!(text.lines().count(), 61);

    let out_dir = dir.path().join("out");
    let run = streamkin()
        .arg("run")
        .arg("--input")
        .arg(&csv)
        .args(["--seed", "11", "--n-perm", "19", "--n-boot", "5"])
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(run.status.success(), "run failed: {run:?}");
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["n_kept"], 60);
    assert_eq!(report["provenance"]["seed"], 11);
    for artifact in ["lambda_hat.csv", "ci_table.csv", "sse_profile_hinge.csv"] {
        assert!(out_dir.join(artifact).exists(), "missing {artifact}");
    }

    // stdout carries the same report
    let printed: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(printed, report);
}

#[test]
fn fit_prints_estimates_for_synthetic_default() {
    let out = streamkin()
        .args(["fit", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "fit failed: {out:?}");
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(fit["nu_hat"].is_number());
    assert!(fit["lambda_hat"]["knots"].is_array());
}

#[test]
fn missing_input_is_a_clean_error() {
    let out = streamkin()
        .args(["describe", "--input", "/nonexistent/stars.csv"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("load"), "unexpected stderr: {msg}");
}
