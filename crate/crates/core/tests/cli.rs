use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sodalite")).args(args).current_dir(dir).output().unwrap()
}

#[test]
fn invalid_placements_fail_unless_allowed() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["ideal", "--out", "ideal.json"]).status.success());
    let text = std::fs::read_to_string(dir.path().join("ideal.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["lattice"][0][0] = serde_json::json!(0.5);
    std::fs::write(dir.path().join("bad.json"), doc.to_string()).unwrap();

    let out = run(dir.path(), &["validate", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL PeriodMarks"));
    assert!(run(dir.path(), &["--allow-invalid", "validate", "bad.json"]).status.success());
    assert_eq!(run(dir.path(), &["export", "bad.json", "--obj", "bad.obj"]).status.code(), Some(1));
}

#[test]
fn malformed_documents_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.json"), "{\"schema_version\": 1").unwrap();
    let out = run(dir.path(), &["validate", "broken.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error at line 1"));
}

#[test]
fn direction_must_be_a_unit_sign() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["tilt", "--direction", "2", "--csv", "t.csv"]);
    assert!(!out.status.success());
    assert!(!dir.path().join("t.csv").exists());
}

#[test]
fn samples_are_numbered() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sample-central", "-n", "3", "--seed", "1", "--out-dir", "s"]);
    assert!(out.status.success());
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("s"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["sample_00000.json", "sample_00001.json", "sample_00002.json"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("degenerate: 0"));
}

#[test]
fn tilt_writes_csv_and_obj_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        run(dir.path(), &["tilt", "--direction", "-1", "--max-steps", "10", "--csv", "out/t.csv", "--obj-every", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/t.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    for i in [0, 5, 10] {
        assert!(dir.path().join(format!("out/t_{i:05}.obj")).exists());
    }
}
