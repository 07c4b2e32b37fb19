//! End-to-end CLI checks: exit codes, JSON schema, byte-stable output, and
//! grounded-KB printing round-trips.

use std::path::PathBuf;
use std::process::Command;

use mknf_aft::kb::KnowledgeBase;

fn kb_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../kbs").join(name)
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mknfaft"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

#[test]
fn output_is_byte_stable_across_runs() {
    let ex5 = kb_path("ex5.kb");
    let ex6 = kb_path("ex6.kb");
    let ex7 = kb_path("ex7.kb");
    for args in [
        vec!["models", ex5.to_str().unwrap(), "--output", "json"],
        vec!["compare", ex7.to_str().unwrap()],
        vec!["props", ex6.to_str().unwrap(), "--output", "json"],
    ] {
        let first = run_cli(&args);
        let second = run_cli(&args);
        assert_eq!(first, second, "args {args:?}");
    }
}

#[test]
fn models_json_schema() {
    let path = kb_path("ex7.kb");
    let (code, stdout, _) = run_cli(&["models", path.to_str().unwrap(), "--output", "json"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["kb"], serde_json::json!(path.to_str().unwrap()));
    assert_eq!(doc["operator"], serde_json::json!("psi"));
    for p in doc["partitions"].as_array().unwrap() {
        assert!(p["t"].is_array() && p["p"].is_array() && p["kind"].is_string());
        assert!(p["reason"].is_string() || p["reason"].is_null());
    }
    // The well-founded model of this KB, rendered with name-sorted atoms.
    assert_eq!(doc["well_founded"]["t"], serde_json::json!(["Kc", "Ke"]));
    assert_eq!(doc["well_founded"]["p"], serde_json::json!(["Kc", "Ke"]));
    assert_eq!(doc["well_founded"]["kind"], serde_json::json!("WELL_FOUNDED"));
}

#[test]
fn check_subcommand_verdicts() {
    let path = kb_path("ex6.kb");
    let (code, stdout, _) =
        run_cli(&["check", path.to_str().unwrap(), "--partition", "a;a"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("status: TWO_VALUED"));
    let (code, stdout, _) =
        run_cli(&["check", path.to_str().unwrap(), "--partition", "a,b;a,b"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("REJECTED (not-stable)"));
}

#[test]
fn exit_codes_for_bad_input() {
    let (code, _, stderr) = run_cli(&["wfm", "/nonexistent/path.kb"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("cannot read"));
    let (code, _, _) = run_cli(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _, _) = run_cli(&["--help"]);
    assert_eq!(code, 0);

    // A KB syntax error is a usage-class failure.
    let dir = std::env::temp_dir().join("mknfaft-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.kb");
    std::fs::write(&bad, "rules:\n K <- .\n").unwrap();
    let (code, _, stderr) = run_cli(&["wfm", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("error"));
}

#[test]
fn grounded_kb_printing_round_trips() {
    for name in ["ex5.kb", "ex6.kb", "ex7.kb", "inconsistent_closure.kb", "no_model.kb"] {
        let text = std::fs::read_to_string(kb_path(name)).unwrap();
        let kb = KnowledgeBase::from_text(&text).unwrap();
        let reparsed = KnowledgeBase::from_text(&kb.to_string()).unwrap();
        assert_eq!(kb.to_string(), reparsed.to_string(), "{name}");
    }
}
