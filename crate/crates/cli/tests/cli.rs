//! End-to-end checks of the command-line surface: exit codes, report
//! files, and the machine-parsable failure records.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_memaccel")
}

fn workspace_path(relative: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(relative)
}

fn run(args: &[&str]) -> Output {
    Command::new(binary()).args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn build_then_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let tables = dir.path().join("tables");
    let build_report = dir.path().join("build.json");
    let output = run(&[
        "build-tables",
        "--tables",
        tables.to_str().unwrap(),
        "--out",
        build_report.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "build-tables failed: {}", stderr(&output));
    assert!(tables.join("acs.matb").is_file());
    assert!(tables.join("minsel.matb").is_file());

    let verify_report = dir.path().join("verify.json");
    let output = run(&[
        "verify",
        "--tables",
        tables.to_str().unwrap(),
        "--bits",
        "50000",
        "--out",
        verify_report.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "verify failed: {}", stderr(&output));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&verify_report).unwrap()).unwrap();
    assert_eq!(report["status"], "pass");
    assert_eq!(report["config"]["seed"], 1);
    assert!(report["table_digests"]["acs"].as_str().unwrap().len() == 64);
}

#[test]
fn corrupted_table_fails_verification_with_a_record() {
    let dir = tempfile::tempdir().unwrap();
    let tables = dir.path().join("tables");
    let output = run(&["build-tables", "--tables", tables.to_str().unwrap(), "--out",
        dir.path().join("b.json").to_str().unwrap()]);
    assert!(output.status.success());

    // Flip the first metric nibble in the payload: the digest still
    // matches the code, only the exhaustive sweep can notice.
    let acs_path = tables.join("acs.matb");
    let mut bytes = std::fs::read(&acs_path).unwrap();
    bytes[memaccel::tables::TABLE_HEADER_BYTES] ^= 0x01;
    std::fs::write(&acs_path, bytes).unwrap();

    let output = run(&[
        "verify",
        "--tables",
        tables.to_str().unwrap(),
        "--bits",
        "20000",
        "--out",
        dir.path().join("v.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1), "stdout: {}", stdout(&output));
    let record = stderr(&output);
    let line = record.lines().find(|l| l.contains("\"failure\"")).expect("failure record");
    let parsed: serde_json::Value = serde_json::from_str(line).expect("record is JSON");
    assert_eq!(parsed["failure"], "acs-table-exhaustive");
}

#[test]
fn truncated_table_is_a_load_error() {
    let dir = tempfile::tempdir().unwrap();
    let tables = dir.path().join("tables");
    let output = run(&["build-tables", "--tables", tables.to_str().unwrap(), "--out",
        dir.path().join("b.json").to_str().unwrap()]);
    assert!(output.status.success());

    let path = tables.join("minsel.matb");
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();

    let output = run(&[
        "verify",
        "--tables",
        tables.to_str().unwrap(),
        "--out",
        dir.path().join("v.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("truncated"));
}

#[test]
fn plan_reports_the_receiver_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    let graph = workspace_path("graphs/dvbt.json");
    let output = run(&[
        "plan",
        "--graph",
        graph.to_str().unwrap(),
        "--exhaustive",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "plan failed: {}", stderr(&output));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["status"], "pass");
    assert_eq!(report["results"]["tables"][0]["members"][0], "viterbi");
    assert_eq!(report["results"]["termination"], "memory-exhausted");
}

#[test]
fn plan_resolves_segmentation_from_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    let graph = workspace_path("graphs/viterbi_segmented.json");
    let output = run(&["plan", "--graph", graph.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(output.status.success(), "plan failed: {}", stderr(&output));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let diagnostics = report["results"]["diagnostics"].as_array().unwrap();
    assert!(diagnostics.iter().any(|d| d.as_str().unwrap().contains("segmented viterbi")));
}

#[test]
fn missing_graph_file_is_an_error_exit() {
    let output = run(&["plan", "--graph", "/nonexistent/graph.json"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("\"failure\""));
}

#[test]
fn report_prints_the_three_figure_speedup() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let output = run(&[
        "report",
        "--tabled-cost",
        "7.71",
        "--mgmt-cost",
        "0.74",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("acceleration factor a = 10.4"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["results"]["accel_factor"]["exact"], "771/74");
}

#[test]
fn degenerate_report_inputs_are_an_error_exit() {
    let output = run(&["report", "--tabled-cost", "1", "--mgmt-cost", "0"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn nco_bench_runs_quickly_at_small_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nco.json");
    let output = run(&[
        "nco-bench",
        "--period",
        "512",
        "--offsets",
        "8",
        "--reps",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "nco-bench failed: {}", stderr(&output));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["results"]["table_bytes"], 512 * 8 * 4);
}
