use std::path::Path;
use std::process::{Command, Output};

fn loglp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loglp")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn empty_config_runs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "empty.toml", "");
    let out = loglp(&["--config", &config, "run-all"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "bogus = 1\n");
    let out = loglp(&["--config", &bad, "run-all"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    assert_eq!(loglp(&["verify", "nope"]).status.code(), Some(2));
    assert_eq!(loglp(&["miyachi", "nope"]).status.code(), Some(2));

    let narrow = write(dir.path(), "narrow.toml", "[grid]\nn = 64\n");
    assert_eq!(loglp(&["--config", &narrow, "partition"]).status.code(), Some(2));
}

#[test]
fn partition_writes_cells_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("bundle");
    let out = loglp(&["partition", "--out", out_dir.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("partition"));

    let cells = std::fs::read_to_string(out_dir.join("cells.csv")).unwrap();
    let mut lines = cells.lines();
    assert_eq!(lines.next(), Some("k,ell_0,ell_1,center_0,center_1,r_k,support_radius"));
    assert!(lines.count() > 10);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("partition.json")).unwrap()).unwrap();
    assert_eq!(report["name"], "partition");
    assert_eq!(report["passed"], true);
}

#[test]
fn csv_format_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "small.toml",
        "[grid]\nn = 1024\n[corpus]\nrandom = 2\npackets = 1\ntones = 1\n",
    );
    let out_dir = dir.path().join("bundle");
    let out = loglp(&["--config", &config, "--format", "csv", "--out", out_dir.to_str().unwrap(), "verify", "recoupling"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("summary.csv").exists());
    assert!(out_dir.join("recoupling.csv").exists());
    assert!(!out_dir.join("recoupling.json").exists());
}

#[test]
fn failing_estimate_exits_with_one() {
    let out = loglp(&["miyachi", "power_phase"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("miyachi"));
}
