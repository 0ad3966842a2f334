use std::process::{Command, Output};

fn qsis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsis"))
        .args(args)
        .output()
        .unwrap()
}

const RECT: &str = r#"{"kind":"rect"}"#;

#[test]
fn out_flag_keeps_stdout_empty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = qsis(&[
        "sweep",
        "--generator",
        RECT,
        "--l-grid",
        "0,0.1,0.3",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# qsis-sweep v1\nL,theorem_id,"));
}

#[test]
fn generator_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(&path, r#"{"kind":"bspline","order":2}"#).unwrap();
    let out = qsis(&[
        "analyze",
        "--generator",
        path.to_str().unwrap(),
        "--resolution",
        "64",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let lower = report["squared_bounds"]["lower"].as_f64().unwrap();
    assert!((lower - 2.0 / 15.0).abs() < 1e-3);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["analyze", "--generator", RECT, "--p", "17"],
        vec!["analyze", "--generator", RECT, "--grid-k", "513"],
        vec!["analyze", "--generator", RECT, "--resolution", "8193"],
        vec!["sweep", "--generator", RECT, "--l-grid", ""],
        vec!["analyze", "--generator", "/nonexistent/g.json"],
        vec!["analyze", "--generator", r#"{"kind":"wavelet"}"#],
        vec!["analyze"],
    ] {
        assert_eq!(qsis(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_3() {
    let out = qsis(&[
        "oracle",
        "--generator",
        r#"{"kind":"sinc"}"#,
        "--samples",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}
