use std::fs;
use std::process::{Command, Output};

use vdse::{bundled, dsl, export, ExportError};

fn vdse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdse"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_bundled() {
    let o = vdse(&["validate", "@uber"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "scenario `uber`: 0 errors, 0 warnings\n");
}

#[test]
fn validate_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let text = bundled::SPEEDING.replace(
        "flow e16_1: E16 car -> speed_camera",
        "flow e16_1: E16 speed_camera -> car",
    );
    let file = write(&dir, "broken.vdse", &text);
    let o = vdse(&["validate", &file]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("error[DIRECTION_VIOLATION] e16_1"));

    let o = vdse(&["validate", &file, "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["violations"][0]["code"], "DIRECTION_VIOLATION");
}

#[test]
fn warnings_go_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{}flow e9_2: E9 insurer -> tracker package DP9_1\n",
        bundled::SPEEDING
    );
    let file = write(&dir, "lint.vdse", &text);
    let o = vdse(&["validate", &file]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning[OWNERSHIP_LINT]"));
    assert!(stdout(&o).ends_with("0 errors, 1 warning\n"));
}

#[test]
fn paths_text_output() {
    let o = vdse(&["paths", "@speeding", "--from", "driver", "--to", "insurer"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("p1: (e1_1, e20_2)  driver -> car -> insurer\n"));
    assert!(text.ends_with("4 strict paths from driver to insurer\n"));
}

#[test]
fn paths_json_matches_library() {
    let o = vdse(&[
        "paths",
        "@uber",
        "--from",
        "passenger1",
        "--to",
        "driver",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let g = bundled::uber();
    let list = vdse::enumerate_paths(&g, "passenger1", "driver", &Default::default()).unwrap();
    assert_eq!(
        stdout(&o),
        export::paths_to_json("passenger1", "driver", &list, false) + "\n"
    );
}

#[test]
fn usage_errors() {
    let o = vdse(&["paths", "missing.vdse", "--from", "a", "--to", "a"]);
    assert_eq!(o.status.code(), Some(3));
    let o = vdse(&[
        "paths",
        "@uber",
        "--from",
        "driver",
        "--to",
        "uber",
        "--max-len",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = vdse(&["paths", "@uber", "--from", "nobody", "--to", "uber"]);
    assert_eq!(o.status.code(), Some(3));
    let o = vdse(&["exposure", "@uber", "--person", "car"]);
    assert_eq!(o.status.code(), Some(3));
    let o = vdse(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(3));
    let o = vdse(&["validate", "@nothing"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn parse_error_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(&dir, "bad.vdse", "scenario \"t\"\nentity driver: Q\n");
    let o = vdse(&["validate", &file]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":2:"), "{err}");
}

#[test]
fn missing_file_is_io_error() {
    let o = vdse(&["validate", "/nonexistent/dir/x.vdse"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn export_json_is_graph_document() {
    let o = vdse(&["export", "@uber", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["scenario"], "uber");
    assert_eq!(doc["entities"].as_array().unwrap().len(), 9);
}

#[test]
fn export_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("uber.dot");
    let o = vdse(&[
        "export",
        "@uber",
        "--format",
        "dot",
        "-o",
        target.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let dot = fs::read_to_string(target).unwrap();
    assert!(dot.starts_with("digraph \"uber\" {\n"));
}

#[test]
fn highlight_requires_dot() {
    let o = vdse(&[
        "export",
        "@uber",
        "--format",
        "json",
        "--highlight",
        "passenger1:driver",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(
        String::from_utf8_lossy(&o.stderr).contains(&ExportError::HighlightRequiresDot.to_string())
    );
}

#[test]
fn fmt_rewrites_to_canonical_form() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(&dir, "s.vdse", bundled::SPEEDING);
    assert_eq!(vdse(&["fmt", &file]).status.code(), Some(0));
    let once = fs::read_to_string(&file).unwrap();
    assert_eq!(once, dsl::serialize(&bundled::speeding()).unwrap());
    assert_eq!(vdse(&["fmt", &file]).status.code(), Some(0));
    assert_eq!(fs::read_to_string(&file).unwrap(), once);
}

#[test]
fn schema_dot() {
    let o = vdse(&["schema", "--format", "dot"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[label=\"E21\", style=dashed, dir=both];"));
}

#[test]
fn in_process_run_matches_binary() {
    let args = [
        "vdse",
        "exposure",
        "@speeding",
        "--person",
        "driver",
        "--json",
    ];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let status = vdse_cli::run(args, &mut out, &mut err);
    assert_eq!(status.code(), 0);
    assert_eq!(out, vdse(&args[1..]).stdout);
}
