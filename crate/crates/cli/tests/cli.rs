//! The `gliq` binary: exit statuses and report files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "core", "tests", "fixtures", name].iter().collect()
}

fn gliq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gliq")).args(args).output().expect("binary runs")
}

fn fixture_arg(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn safe_program_exits_zero() {
    let out = gliq(&["check", &fixture_arg("divif.gl"), "--templates-minimal"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0 < x"), "{stdout}");
}

#[test]
fn program_without_safe_concretization_exits_one() {
    let out = gliq(&["check", &fixture_arg("only_pos.gl")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("validity stage"));
}

#[test]
fn syntax_error_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.gl");
    std::fs::write(&file, "def f x = if x then\n").unwrap();
    let out = gliq(&["check", &file.display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_file_and_bad_usage_exit_two() {
    assert_eq!(gliq(&["check", "/nonexistent/file.gl"]).status.code(), Some(2));
    assert_eq!(gliq(&["check"]).status.code(), Some(2));
    assert_eq!(gliq(&["check", &fixture_arg("divif.gl"), "--depth", "many"]).status.code(), Some(2));
}

#[test]
fn unusable_solver_exits_two() {
    let out = gliq(&["check", &fixture_arg("divif.gl"), "--smt-cmd", "/nonexistent/solver"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn writes_json_and_html_reports() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let html = dir.path().join("r.html");
    let out = gliq(&[
        "check",
        &fixture_arg("idx.gl"),
        "--depth",
        "2",
        "--json",
        &json.display().to_string(),
        "--html",
        &html.display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = gliq_core::report::ReportDocument::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    doc.check_metrics().unwrap();
    assert_eq!(doc.metrics.nd, 2);
    assert_eq!(doc.occurrences.len(), 3);
    let page = std::fs::read_to_string(&html).unwrap();
    assert!(page.contains("gliq-report"));
}
