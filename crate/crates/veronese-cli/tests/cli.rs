//! End-to-end tests of the binary: exit-code contract, determinism, and
//! the documented command scenarios.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_veronese"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_line(output: &Output) -> String {
    let text = String::from_utf8_lossy(&output.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "exactly one line on stdout, got {text:?}");
    lines[0].to_string()
}

fn tmp(name: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(name);
    (dir, path)
}

fn generate(args: &[&str], out: &Path) {
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap();
    full.extend(["--out", out_str]);
    let output = run(&full);
    assert!(
        output.status.success(),
        "generate failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn generate_is_deterministic_and_byte_identical() {
    let (_d1, p1) = tmp("a.json");
    let (_d2, p2) = tmp("b.json");
    let args = ["generate", "disguise", "--n", "2", "--q", "2", "--seed", "7", "--trunc", "7"];
    generate(&args, &p1);
    generate(&args, &p2);
    let a = std::fs::read(&p1).unwrap();
    let b = std::fs::read(&p2).unwrap();
    assert_eq!(a, b, "same seed must produce byte-identical files");
    assert!(!a.is_empty());

    // a different seed produces a different germ
    let (_d3, p3) = tmp("c.json");
    generate(
        &["generate", "disguise", "--n", "2", "--q", "2", "--seed", "8", "--trunc", "7"],
        &p3,
    );
    assert_ne!(a, std::fs::read(&p3).unwrap());
}

#[test]
fn decide_exit_codes_follow_the_contract() {
    let (_dir, standard) = tmp("v.json");
    generate(&["generate", "veronese", "--n", "2", "--q", "2"], &standard);
    let output = run(&["decide", standard.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout_line(&output), "VERONESE");

    let (_dir, disguised) = tmp("d.json");
    generate(
        &["generate", "disguise", "--n", "2", "--q", "2", "--seed", "3", "--trunc", "7"],
        &disguised,
    );
    let output = run(&["decide", disguised.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout_line(&output), "VERONESE");

    let (_dir, family) = tmp("f.json");
    generate(
        &["generate", "family", "--n", "2", "--q", "2", "--trunc", "7", "--R2", "s1^5"],
        &family,
    );
    let output = run(&["decide", family.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    assert_eq!(stdout_line(&output), "PROPERTY_P_NOT_VERONESE");

    let (_dir, dropped) = tmp("p.json");
    generate(
        &["generate", "project-drop", "--n", "2", "--q", "2", "--alpha", "1,1"],
        &dropped,
    );
    let output = run(&["decide", dropped.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    assert_eq!(stdout_line(&output), "NOT_Q_REGULAR");

    let (_dir, perturbed) = tmp("x.json");
    generate(
        &[
            "generate", "perturb", "--n", "2", "--q", "2", "--trunc", "7", "--add", "2,0:s2^3",
            "--add", "1,1:s2^3",
        ],
        &perturbed,
    );
    let output = run(&["decide", perturbed.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    assert_eq!(stdout_line(&output), "NOT_PROPERTY_P");
}

#[test]
fn decide_report_names_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let germ = dir.path().join("v.json");
    let report = dir.path().join("report.json");
    generate(&["generate", "veronese", "--n", "2", "--q", "2"], &germ);
    let output = run(&[
        "decide",
        germ.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let line = stdout_line(&output);
    assert!(line.starts_with("VERONESE report="), "got {line}");
    let body = std::fs::read_to_string(&report).unwrap();
    assert!(body.contains("\"verdict\": \"VERONESE\""));
}

#[test]
fn check_exit_codes_follow_the_contract() {
    let (_dir, standard) = tmp("v.json");
    generate(&["generate", "veronese", "--n", "2", "--q", "2", "--trunc", "7"], &standard);
    let output = run(&["check", standard.to_str().unwrap(), "--what", "regularity"]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout_line(&output), "REGULAR dims=2,5");

    let (_dir, dropped) = tmp("p.json");
    generate(
        &["generate", "project-drop", "--n", "2", "--q", "2", "--alpha", "1,1"],
        &dropped,
    );
    let output = run(&["check", dropped.to_str().unwrap(), "--what", "regularity"]);
    assert_eq!(output.status.code(), Some(1));
    assert_eq!(stdout_line(&output), "NOT_REGULAR dims=2,4");

    let (_dir, family) = tmp("f.json");
    generate(
        &["generate", "family", "--n", "2", "--q", "2", "--trunc", "7", "--R2", "s1^5"],
        &family,
    );
    let output = run(&["check", family.to_str().unwrap(), "--what", "pattern"]);
    assert_eq!(output.status.code(), Some(0));
    let output = run(&[
        "check",
        family.to_str().unwrap(),
        "--what",
        "rnc-lines",
        "--samples",
        "5",
    ]);
    assert_eq!(output.status.code(), Some(1));
    let line = stdout_line(&output);
    assert!(line.starts_with("RNC_LINES_FAIL sigma="), "got {line}");

    let output = run(&["check", standard.to_str().unwrap(), "--what", "rnc-lines"]);
    assert_eq!(output.status.code(), Some(0));

    let output = run(&["check", standard.to_str().unwrap(), "--what", "osculating"]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout_line(&output), "OSCULATING_MAXIMAL dims=2,5");
}

#[test]
fn reduce_writes_replayable_traces() {
    let dir = tempfile::tempdir().unwrap();
    let germ = dir.path().join("d.json");
    let trace = dir.path().join("trace.json");
    generate(
        &["generate", "disguise", "--n", "2", "--q", "2", "--seed", "5", "--trunc", "7"],
        &germ,
    );
    let output = run(&[
        "reduce",
        germ.to_str().unwrap(),
        "--trace-out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout_line(&output).starts_with("REDUCED trace="));

    // the trace shows q stages, all advancing
    let body: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    let stages = body["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 2);
    assert!(stages.iter().all(|s| s["verdict"] == "advance"));

    let output = run(&[
        "reduce",
        germ.to_str().unwrap(),
        "--replay",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout_line(&output), "REPLAY_OK");

    // replaying against a different germ fails
    let other = dir.path().join("other.json");
    generate(
        &["generate", "disguise", "--n", "2", "--q", "2", "--seed", "6", "--trunc", "7"],
        &other,
    );
    let output = run(&[
        "reduce",
        other.to_str().unwrap(),
        "--replay",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert_eq!(stdout_line(&output), "REPLAY_FAIL");

    // a certified failure exits 1 and still writes a replayable trace
    let perturbed = dir.path().join("x.json");
    let ptrace = dir.path().join("ptrace.json");
    generate(
        &[
            "generate", "perturb", "--n", "2", "--q", "2", "--trunc", "7", "--add", "2,0:s2^3",
            "--add", "1,1:s2^3",
        ],
        &perturbed,
    );
    let output = run(&[
        "reduce",
        perturbed.to_str().unwrap(),
        "--trace-out",
        ptrace.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert_eq!(stdout_line(&output), format!("NOT_PROPERTY_P stage=1 trace={}", ptrace.display()));
    let output = run(&[
        "reduce",
        perturbed.to_str().unwrap(),
        "--replay",
        ptrace.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn family_file_matches_the_construction() {
    let (_dir, family) = tmp("f.json");
    generate(
        &["generate", "family", "--n", "2", "--q", "2", "--trunc", "7", "--R2", "s1^5"],
        &family,
    );
    let body = std::fs::read_to_string(&family).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(parsed["kind"], "germ");
    assert_eq!(parsed["n"], 2);
    // x_(2,0) = s1^2 + s1^7
    let comp = &parsed["components"][2];
    assert_eq!(comp["alpha"], serde_json::json!([2, 0]));
    assert_eq!(
        comp["terms"],
        serde_json::json!([
            { "exp": [2, 0], "coeff": "1" },
            { "exp": [7, 0], "coeff": "1" }
        ])
    );
}

#[test]
fn usage_and_parse_errors_exit_2() {
    // malformed file: first offending line cited on stderr
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"format_version\": 1,\n  oops\n}").unwrap();
    let output = run(&["decide", bad.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");

    // semantic violation: coefficient not in lowest terms
    let sneaky = dir.path().join("sneaky.json");
    std::fs::write(
        &sneaky,
        serde_json::json!({
            "format_version": 1,
            "n": 1, "q": 1, "trunc": 4,
            "kind": "germ",
            "components": [
                { "alpha": [1], "terms": [ { "exp": [1], "coeff": "2/4" } ] }
            ]
        })
        .to_string(),
    )
    .unwrap();
    let output = run(&["decide", sneaky.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("lowest terms"));

    // unknown flags and missing arguments
    let output = run(&["decide"]);
    assert_eq!(output.status.code(), Some(2));
    let output = run(&["generate", "veronese", "--n", "2"]);
    assert_eq!(output.status.code(), Some(2));

    // constraint violations named in the message
    let out = dir.path().join("never.json");
    let output = run(&[
        "generate", "veronese", "--n", "2", "--q", "2", "--trunc", "4", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("trunc"));

    let output = run(&[
        "generate", "family", "--n", "2", "--q", "2", "--R3", "s1^5", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("weight 3 exceeds"));

    // family factor too shallow for its weight
    let output = run(&[
        "generate", "family", "--n", "2", "--q", "2", "--trunc", "7", "--R2", "s1^2", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("O(|s|^3)"));
    assert!(!out.exists(), "no file is written on failure");
}
