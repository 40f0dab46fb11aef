use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::json;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn rbam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbam")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write_config(dir: &Path, backend: serde_json::Value) -> PathBuf {
    let config = json!({
        "datasets": [
            {"name": "essays", "path": fixtures().join("essays")},
            {"name": "kialo", "path": fixtures().join("kialo.jsonl")}
        ],
        "backend": backend,
        "output_dir": "out"
    });
    let path = dir.join("config.json");
    fs::write(&path, config.to_string()).unwrap();
    path
}

#[test]
fn run_then_score_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), json!({"kind": "mock", "oracle": true}));
    let config = config.to_str().unwrap();

    let out = rbam(&["run", "--config", config]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("Essays") && table.contains("Macro F1"), "{table}");

    let records = dir.path().join("out/records.jsonl");
    let records = records.to_str().unwrap();
    let out = rbam(&["report", "--records", records, "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("dataset,f1_support,f1_attack,f1_both"));
    assert!(csv.contains("\nEssays,100,100,100,5,3,0,0,"), "{csv}");
    assert!(csv.contains("\nMacro F1,,,100,"), "{csv}");

    assert_eq!(code(&rbam(&["score", "--records", records])), 0);
    assert_eq!(code(&rbam(&["report", "--records", records, "--format", "table"])), 0);

    // Same output directory again without --force.
    assert_eq!(code(&rbam(&["run", "--config", config])), 1);
    assert_eq!(code(&rbam(&["run", "--config", config, "--force"])), 0);
}

#[test]
fn stats_prints_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), json!({"kind": "mock", "answers": ["support"]}));
    let out = rbam(&["stats", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let essays = text.lines().find(|l| l.starts_with("Essays")).unwrap();
    assert_eq!(essays.split_whitespace().take(4).collect::<Vec<_>>(), ["Essays", "5", "3", "8"]);
}

#[test]
fn validate_reports_problems() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), json!({"kind": "mock", "answers": ["support"]}));
    assert_eq!(code(&rbam(&["validate", "--config", good.to_str().unwrap()])), 0);

    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        json!({"datasets": [{"name": "essays", "path": "missing"}], "backend": {"kind": "mock"}, "output_dir": "o"})
            .to_string(),
    )
    .unwrap();
    let out = rbam(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("does not exist") && err.contains("exactly one"), "{err}");

    fs::write(&bad, "{not json").unwrap();
    assert_eq!(code(&rbam(&["validate", "--config", bad.to_str().unwrap()])), 1);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&rbam(&[])), 1);
    assert_eq!(code(&rbam(&["run"])), 1);
    assert_eq!(code(&rbam(&["report", "--records", "x", "--format", "xml"])), 1);
    assert_eq!(code(&rbam(&["score", "--records", "/no/such/file"])), 1);
    assert_eq!(code(&rbam(&["--help"])), 0);
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("records.jsonl");
    fs::write(&broken, "{\"id\": 1}\n").unwrap();
    let out = rbam(&["score", "--records", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":1:"));

    let config = write_config(
        dir.path(),
        json!({"kind": "http", "base_url": "http://127.0.0.1:9/v1", "model": "m", "timeout_seconds": 2}),
    );
    let out = rbam(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unreachable"));
}
