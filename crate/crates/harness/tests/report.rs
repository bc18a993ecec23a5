use loglp_core::{RealField64, TorusGrid};
use loglp_harness::report::{median, pointwise_ratio, relative_drift, MAX_EXCLUDED_SHARE, RHS_FLOOR};
use loglp_harness::{write_bundle, OutputFormat, Record, Report};

fn field(values: Vec<f64>) -> RealField64 {
    RealField64::new(TorusGrid::new(1, values.len()).unwrap(), values).unwrap()
}

#[test]
fn pointwise_ratio_excludes_degenerate_denominators() {
    let lhs = field(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
    let rhs = field(vec![1.0, 1.0, 0.5, RHS_FLOOR / 2.0, 2.0, 3.0, 7.0, 4.0]);
    let stat = pointwise_ratio(&lhs, &rhs);
    assert_eq!(stat.excluded, 1);
    assert_eq!(stat.evaluated, 7);
    assert_eq!(stat.max, 6.0);
    assert_eq!(stat.argmax, 2);
    assert_eq!(stat.ratios[3], 0.0);
    // kept ratios 1, 2, 6, 2.5, 2, 1, 2
    assert_eq!(stat.median, 2.0);
}

#[test]
fn median_and_drift() {
    assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    assert_eq!(median(&mut []), 0.0);
    assert!((relative_drift(2.0, 2.5) - 0.25).abs() < 1e-15);
}

#[test]
fn scalar_members_and_standing_checks() {
    let mut r = Report::new("demo", "none");
    r.push_scalar("a", 3.0, 2.0);
    r.push_scalar("b", 1.0, 4.0);
    r.summarize();
    assert_eq!(r.constant, 1.5);
    assert!(r.provisional);
    r.set_drift(Some(1.6), Some(1.5), 0.25);
    assert!(!r.provisional);
    let r = r.finish();
    assert!(r.passed, "{:?}", r.failed_checks());
    assert!(r.check("grid_drift").is_some() && r.check("excluded_share").is_some());

    let mut bad = Report::new("demo", "none");
    for i in 0..10 {
        bad.push_scalar(&format!("m{i}"), 1.0, if i == 0 { 0.0 } else { 1.0 });
    }
    bad.summarize();
    let bad = bad.finish();
    assert!(0.1 > MAX_EXCLUDED_SHARE);
    assert!(!bad.passed);
    assert_eq!(bad.failed_checks()[0].name, "excluded_share");
}

#[test]
fn drift_beyond_tolerance_fails() {
    let mut r = Report::new("demo", "none");
    r.push_scalar("a", 1.0, 1.0);
    r.summarize();
    r.set_drift(Some(2.0), None, 0.25);
    assert!(r.provisional);
    let r = r.finish();
    assert!(!r.passed);
}

fn sample() -> Report {
    let mut r = Report::new("sample", "tone#0");
    let stat = pointwise_ratio(&field(vec![1.0; 8]), &field(vec![2.0; 8]));
    r.push_pointwise("tone#0", &stat, 1.0, 2.0);
    r.records.push(Record::new("k=4", &[("k", 4.0), ("constant", 0.5)]));
    r.records.push(Record::new("extra", &[("other", 1.0)]));
    r.summarize();
    r.finish()
}

#[test]
fn bundles_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let reports = vec![sample()];
    let files = write_bundle(&reports, dir.path(), OutputFormat::Json).unwrap();
    assert!(files.iter().any(|f| f.ends_with("summary.csv")));
    let text = std::fs::read_to_string(dir.path().join("sample.json")).unwrap();
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(back, reports[0]);
    let profile = std::fs::read_to_string(dir.path().join("sample_profile.csv")).unwrap();
    assert!(profile.starts_with("x,"));

    let dir = tempfile::tempdir().unwrap();
    write_bundle(&reports, dir.path(), OutputFormat::Csv).unwrap();
    assert!(dir.path().join("sample.csv").exists());
    let records = std::fs::read_to_string(dir.path().join("sample_records.csv")).unwrap();
    assert_eq!(records.lines().next().unwrap(), "label,constant,k,other");
    assert_eq!(records.lines().nth(2).unwrap(), "extra,,,1");
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
}
