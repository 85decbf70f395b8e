//! End-to-end checks of the installed binary: exit codes, payload shape,
//! and byte-for-byte determinism of reruns.

use std::path::Path;
use std::process::{Command, Output};

fn bdflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn decompose_exit_codes_follow_the_failure_kind() {
    let ok = bdflow(&["decompose", "--beta", "0.9"]);
    assert_eq!(exit_code(&ok), 0, "stderr: {}", stderr(&ok));
    let text = stdout(&ok);
    assert!(text.starts_with("# bdflow decompose\n"));
    assert!(text.contains("identity_residual"));

    let parse = bdflow(&["decompose", "--beta", "abc"]);
    assert_eq!(exit_code(&parse), 2);

    let infeasible = bdflow(&["decompose", "--beta", "0.999"]);
    assert_eq!(exit_code(&infeasible), 4);
    assert!(stderr(&infeasible).contains("error:"));

    let fraction = bdflow(&["decompose", "--beta", "95/96"]);
    assert_eq!(exit_code(&fraction), 0);
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = bdflow(&["run", "--config", "/nonexistent/nope.toml"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "bad.toml", "[scheme]\nk = 3\n");
    let out = bdflow(&["run", "--config", &path]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn certify_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = bdflow(&[
            "certify-beta3",
            "--samples",
            "5000",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b);

    let j1 = bdflow(&["certify-beta3", "--samples", "5000", "--seed", "7", "--format", "json"]);
    let j2 = bdflow(&["certify-beta3", "--samples", "5000", "--seed", "7", "--format", "json"]);
    assert_eq!(exit_code(&j1), 0);
    assert_eq!(j1.stdout, j2.stdout);
    let parsed: serde_json::Value = serde_json::from_slice(&j1.stdout).unwrap();
    assert_eq!(parsed["beta3_exact"], "95/96");

    let other_seed = bdflow(&["certify-beta3", "--samples", "5000", "--seed", "8"]);
    assert_ne!(j1.stdout, other_seed.stdout);
}

#[test]
fn run_produces_audited_trajectory_payloads() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "run.toml",
        r#"
[scheme]
k = 3
dt = 0.5
max_steps = 120

[energy]
kind = "allen-cahn"
n = 8
h = 1.0
well_scale = 1.0

[init]
mode = "exact-list"

[init.profile]
kind = "cosine"
amplitude = 0.5
"#,
    );

    let csv = bdflow(&["run", "--config", &path]);
    assert_eq!(exit_code(&csv), 0, "stderr: {}", stderr(&csv));
    let text = stdout(&csv);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# bdflow run"));
    assert!(lines.next().unwrap().starts_with("# config: "));
    let header = lines.next().unwrap();
    assert!(header.starts_with("index,time,energy,residual,w_norm,increment_norm"));
    assert!(header.ends_with("state_7"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,"));
    assert!(stderr(&csv).contains("descent audit"));

    let json = bdflow(&["run", "--config", &path, "--format", "json"]);
    assert_eq!(exit_code(&json), 0);
    let parsed: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(parsed["k"], 3);
    assert_eq!(parsed["audit"]["ok"], true);
    assert_eq!(parsed["budget"]["ok"], true);
    assert_eq!(parsed["boundedness"]["ok"], true);
}

#[test]
fn counterexample_payload_reports_the_alternation() {
    let out = bdflow(&["counterexample", "--k", "3", "--steps", "20"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("n,u,increment,residual"));
    assert_eq!(text.lines().count(), 3 + 20);
    assert!(stderr(&out).contains("20/3"));

    let bad = bdflow(&["counterexample", "--k", "4"]);
    assert_eq!(exit_code(&bad), 2);
}

#[test]
fn order_study_emits_one_row_per_step_size() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "order.toml",
        r#"
k = 2
t_final = 1.0
dts = [0.1, 0.05, 0.025]
init = [1.0]

[energy]
kind = "quadratic"
matrix = [[1.0]]
"#,
    );
    let out = bdflow(&["order-study", "--config", &path]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("dt,error"));
    assert_eq!(text.lines().count(), 3 + 3);
    assert!(stderr(&out).contains("slope"));
}

#[test]
fn multivalued_demo_walks_every_branch() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "mv.toml",
        r#"
history = [[0.0], [0.0], [0.0]]
continue_steps = 30

[scheme]
k = 3
dt = 1.9
max_steps = 100

[energy]
kind = "double-well"
scale = 1.0
"#,
    );
    let out = bdflow(&["multivalued-demo", "--config", &path, "--format", "json"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("3 candidate states"));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let branches = parsed["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 3);
    for branch in branches {
        assert_eq!(branch["audit"]["ok"], true);
    }
}
