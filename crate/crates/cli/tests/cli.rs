//! End-to-end tests of the installed binary: exit codes, report formats,
//! flag handling, and the atomic `--out` contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .expect("workspace root")
        .to_path_buf()
}

fn fairopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairopt"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn write_csv(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).expect("fixture written");
    path
}

// ==== happy paths ====

#[test]
fn solve_summary_tells_the_whole_fixture_story() {
    let output = fairopt(&["solve", "--config", "data/students.toml", "--format", "summary"]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("best utility 22 by {B, Z}"), "got:\n{text}");
    assert!(text.contains("utility 21, regret 1, 6 tied optima"), "got:\n{text}");
    assert!(text.contains("{A, Z} optimal at theta in [0.333333, 0.375]"), "got:\n{text}");
    assert!(
        text.contains("fairest family member: {A, Z} (fairness 0, optimal at theta* = 17/48)"),
        "got:\n{text}"
    );
}

#[test]
fn sweep_reproduces_the_score_table_through_the_binary() {
    let output = fairopt(&[
        "sweep",
        "--config",
        "data/students.toml",
        "--grid",
        "1/5,7/20,1/2",
        "--format",
        "csv",
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    // One spot-check per grid point plus the full θ = 7/20 column.
    for row in [
        "1/5,A,Amy,f,10",
        "1/5,E,Eve,f,7",
        "1/5,M,Max,m,43/5",
        "7/20,A,Amy,f,10",
        "7/20,B,Bob,m,49/5",
        "7/20,E,Eve,f,17/2",
        "7/20,I,Isa,f,97/10",
        "7/20,M,Max,m,83/10",
        "7/20,Z,Zac,m,101/10",
        "1/2,B,Bob,m,11",
        "1/2,Z,Zac,m,11",
    ] {
        assert!(text.contains(row), "missing row {row} in:\n{text}");
    }
    assert!(text.contains("1/5,A+I,97/5"), "optima at 1/5 in:\n{text}");
    assert!(text.contains("7/20,A+Z,201/10"), "optima at 7/20 in:\n{text}");
    assert!(text.contains("1/2,B+Z,22"), "optima at 1/2 in:\n{text}");
}

#[test]
fn json_reports_parse_and_carry_the_config_echo() {
    let output = fairopt(&["solve", "--config", "data/students.toml"]);
    assert_eq!(output.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).expect("valid json");
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["tool"], "fairopt");
    assert_eq!(report["command"], "solve");
    assert_eq!(report["config"]["k"], 2);
    assert_eq!(report["config"]["theta_lo"], "1/3");
    assert_eq!(report["payload"]["fairest"]["theta_star"][0], "17/48");
    assert_eq!(report["payload"]["family"]["members"][0]["regions"][0]["hi"], "3/8");
}

#[test]
fn flags_override_the_config_file() {
    let output = fairopt(&[
        "solve",
        "--config",
        "data/students.toml",
        "--k",
        "1",
        "--theta",
        "1/2",
        "--format",
        "summary",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("best utility 11 by {B}, {Z}"), "got:\n{text}");
}

#[test]
fn audit_flags_interval_data_and_reports_the_asymmetry() {
    let output = fairopt(&[
        "audit",
        "--config",
        "data/students.toml",
        "--data",
        "data/students_intervals.csv",
        "--theta",
        "1/2",
        "--format",
        "summary",
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("searched 4 endpoint completion(s) over 2 open cell(s)"));
    assert!(text.contains("fairest completion selects {E, Z} (fairness 0)"));
    assert!(text.contains("imputation asymmetry: 0.166667"), "got:\n{text}");
    assert!(text.contains("caveat:"), "the report must carry its own warning");
}

#[test]
fn timing_goes_to_stderr_not_the_report() {
    let output = fairopt(&["solve", "--config", "data/students.toml"]);
    assert!(stderr(&output).contains("completed in"), "timing belongs on stderr");
    assert!(!stdout(&output).contains("completed in"), "reports must stay deterministic");
}

// ==== --out atomicity ====

#[test]
fn out_writes_once_and_leaves_no_temp_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("report.json");
    let output = fairopt(&[
        "solve",
        "--config",
        "data/students.toml",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(output.stdout.is_empty(), "--out silences stdout");
    let listing: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(listing, vec!["report.json".to_string()]);
    serde_json::from_slice::<serde_json::Value>(&std::fs::read(&out).unwrap())
        .expect("the written report is complete json");
}

#[test]
fn failures_never_leave_a_partial_out_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("report.json");
    let output = fairopt(&[
        "solve",
        "--data",
        "data/students.csv",
        "--k",
        "4",
        "--theta",
        "1/2",
        "--quota-label",
        "f",
        "--quota-share",
        "9/10",
        "--groups",
        "m,f",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(4));
    let listing: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert!(listing.is_empty(), "an infeasible run must write nothing");
}

// ==== exit codes ====

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "bogus = true\n").unwrap();
    let output = fairopt(&["solve", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("unknown field"), "got: {}", stderr(&output));
}

#[test]
fn missing_required_settings_exit_2() {
    let output = fairopt(&["solve", "--data", "data/students.csv"]);
    assert_eq!(output.status.code(), Some(2), "no k configured");
    let output = fairopt(&["pareto", "--data", "data/students.csv", "--k", "2", "--theta", "1/2"]);
    assert_eq!(output.status.code(), Some(2), "pareto without fairness groups");
}

#[test]
fn broken_data_exits_3_with_row_and_column() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = write_csv(&dir, "dup.csv", "ID,x,y,g\nA,1,2,u\nA,3,4,v\n");
    let output =
        fairopt(&["solve", "--data", path.to_str().unwrap(), "--k", "1", "--theta", "1/2"]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr(&output).contains("row 3"), "got: {}", stderr(&output));

    let path = write_csv(&dir, "interval.csv", "ID,x,y,g\nA,1..2,2,u\nB,3,4,v\n");
    let output = fairopt(&[
        "solve",
        "--data",
        path.to_str().unwrap(),
        "--group-column",
        "g",
        "--k",
        "1",
        "--theta",
        "1/2",
    ]);
    assert_eq!(output.status.code(), Some(3), "interval cells are audit-only");
    let text = stderr(&output);
    assert!(text.contains("row 2") && text.contains("'x'"), "got: {text}");
}

#[test]
fn impossible_quota_exits_4() {
    let output = fairopt(&[
        "solve",
        "--data",
        "data/students.csv",
        "--k",
        "4",
        "--theta",
        "1/2",
        "--groups",
        "m,f",
        "--quota-label",
        "f",
        "--quota-share",
        "9/10",
    ]);
    assert_eq!(output.status.code(), Some(4));
    assert!(stderr(&output).contains("infeasible"), "got: {}", stderr(&output));
}

#[test]
fn singular_hessian_exits_5_with_a_complete_report() {
    let output = fairopt(&["ascent", "--problem", "simplex-relaxation"]);
    assert_eq!(output.status.code(), Some(5));
    let report: serde_json::Value = serde_json::from_slice(&output.stdout)
        .expect("the refusal still emits a full report");
    assert_eq!(report["payload"]["termination"], "singular-hessian");

    // With --out the report file is still written, whole, before exiting 5.
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("ascent.json");
    let output =
        fairopt(&["ascent", "--problem", "simplex-relaxation", "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(5));
    serde_json::from_slice::<serde_json::Value>(&std::fs::read(&out).unwrap())
        .expect("complete file despite the failure code");
}

#[test]
fn oversized_interval_search_exits_6() {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut body = String::from("ID,x,y,g\n");
    for i in 0..21 {
        body.push_str(&format!("S{i},{i}..{},{i},u\n", i + 1));
    }
    body.push_str("T,5,9,v\n");
    let path = write_csv(&dir, "many.csv", &body);
    let output = fairopt(&[
        "audit",
        "--data",
        path.to_str().unwrap(),
        "--group-column",
        "g",
        "--k",
        "1",
        "--theta",
        "1/2",
        "--groups",
        "u,v",
    ]);
    assert_eq!(output.status.code(), Some(6));
    assert!(stderr(&output).contains("21"), "got: {}", stderr(&output));
}

#[test]
fn unknown_ascent_problem_lists_the_registry() {
    let output = fairopt(&["ascent", "--problem", "no-such-problem"]);
    assert_eq!(output.status.code(), Some(2));
    let text = stderr(&output);
    assert!(
        text.contains("quadratic-toy") && text.contains("simplex-relaxation"),
        "got: {text}"
    );
}
