//! Verification reports and the pointwise ratio convention shared by all
//! experiments.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use loglp_core::{RealField64, SquareMeta};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Denominators below this are treated as degenerate.
pub const RHS_FLOOR: f64 = 1e-14;
/// Largest tolerated share of degenerate points in a report.
pub const MAX_EXCLUDED_SHARE: f64 = 1e-3;
/// Default tolerance on refinement drift.
pub const DRIFT_TOLERANCE: f64 = 0.25;
/// Points kept in a report's ratio profile.
const PROFILE_POINTS: usize = 1024;

/// Pointwise `LHS/RHS` over one field pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioStat {
    pub max: f64,
    pub median: f64,
    pub argmax: usize,
    pub evaluated: usize,
    /// Points whose denominator fell below [`RHS_FLOOR`].
    pub excluded: usize,
    pub ratios: Vec<f64>,
}

/// Ratio of two nonnegative fields; excluded points contribute ratio 0.
pub fn pointwise_ratio(lhs: &RealField64, rhs: &RealField64) -> RatioStat {
    let mut ratios = Vec::with_capacity(lhs.values().len());
    let (mut excluded, mut max, mut argmax) = (0, 0.0f64, 0);
    for (i, (&l, &r)) in lhs.values().iter().zip(rhs.values()).enumerate() {
        if r < RHS_FLOOR {
            excluded += 1;
            ratios.push(0.0);
            continue;
        }
        let q = l / r;
        if q > max {
            max = q;
            argmax = i;
        }
        ratios.push(q);
    }
    let mut kept: Vec<f64> = lhs
        .values()
        .iter()
        .zip(rhs.values())
        .filter(|(_, &r)| r >= RHS_FLOOR)
        .map(|(&l, &r)| l / r)
        .collect();
    RatioStat {
        max,
        median: median(&mut kept),
        argmax,
        evaluated: ratios.len() - excluded,
        excluded,
        ratios,
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

/// `|b/a - 1|`, or infinity when `a` vanishes and `b` does not.
pub fn relative_drift(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a == 0.0 {
        f64::INFINITY
    } else {
        (b / a - 1.0).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberStat {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Max over the grid (pointwise reports) or the scalar ratio.
    pub ratio: f64,
    pub median: f64,
    pub excluded: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    /// Constant at `2n` relative to `n`.
    pub grid: Option<f64>,
    /// Constant at `Δu/2` relative to `Δu`.
    pub scales: Option<f64>,
    pub grid_constant: Option<f64>,
    pub scales_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `"<="` or `">="`.
    pub relation: String,
    pub passed: bool,
}

/// Free-form labelled row (threshold sweeps, per-cell records, stage constants).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub label: String,
    pub values: BTreeMap<String, f64>,
}

impl Record {
    pub fn new(label: impl Into<String>, values: &[(&str, f64)]) -> Self {
        Self {
            label: label.into(),
            values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub corpus: String,
    pub members: Vec<MemberStat>,
    /// Corpus max of the member ratios.
    pub constant: f64,
    pub median: f64,
    pub drift: Drift,
    /// Set when either refinement is missing.
    pub provisional: bool,
    pub evaluated: usize,
    pub excluded: usize,
    pub truncation: Option<SquareMeta>,
    pub records: Vec<Record>,
    pub checks: Vec<Check>,
    /// `(x, ratio)` of the worst member, block maxima.
    pub profile: Vec<[f64; 2]>,
    pub passed: bool,
}

impl Report {
    pub fn new(name: impl Into<String>, corpus: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            corpus: corpus.into(),
            members: Vec::new(),
            constant: 0.0,
            median: 0.0,
            drift: Drift::default(),
            provisional: true,
            evaluated: 0,
            excluded: 0,
            truncation: None,
            records: Vec::new(),
            checks: Vec::new(),
            profile: Vec::new(),
            passed: false,
        }
    }

    /// Add a pointwise member; keeps the profile of the worst one.
    pub fn push_pointwise(&mut self, label: &str, stat: &RatioStat, lhs: f64, rhs: f64) {
        if self.members.iter().all(|m| m.ratio < stat.max) {
            self.profile = profile(&stat.ratios);
        }
        self.evaluated += stat.evaluated;
        self.excluded += stat.excluded;
        self.members.push(MemberStat {
            label: label.to_string(),
            lhs,
            rhs,
            ratio: stat.max,
            median: stat.median,
            excluded: stat.excluded,
        });
    }

    /// Add a scalar member `lhs / rhs`.
    pub fn push_scalar(&mut self, label: &str, lhs: f64, rhs: f64) {
        let ratio = if rhs < RHS_FLOOR {
            self.excluded += 1;
            0.0
        } else {
            self.evaluated += 1;
            lhs / rhs
        };
        self.members.push(MemberStat {
            label: label.to_string(),
            lhs,
            rhs,
            ratio,
            median: ratio,
            excluded: usize::from(rhs < RHS_FLOOR),
        });
    }

    pub fn check_le(&mut self, name: &str, value: f64, bound: f64) -> bool {
        let passed = value <= bound;
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
            relation: "<=".into(),
            passed,
        });
        passed
    }

    pub fn check_ge(&mut self, name: &str, value: f64, bound: f64) -> bool {
        let passed = value >= bound;
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
            relation: ">=".into(),
            passed,
        });
        passed
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn record(&self, label: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.label == label)
    }

    /// Fix the constant and median from the members.
    pub fn summarize(&mut self) {
        self.constant = self.members.iter().map(|m| m.ratio).fold(0.0, f64::max);
        let mut ratios: Vec<f64> = self.members.iter().map(|m| m.ratio).collect();
        self.median = median(&mut ratios);
    }

    /// Record refinement constants and add the drift checks.
    pub fn set_drift(&mut self, grid_constant: Option<f64>, scales_constant: Option<f64>, tolerance: f64) {
        self.drift.grid_constant = grid_constant;
        self.drift.scales_constant = scales_constant;
        self.drift.grid = grid_constant.map(|c| relative_drift(self.constant, c));
        self.drift.scales = scales_constant.map(|c| relative_drift(self.constant, c));
        self.provisional = grid_constant.is_none() || scales_constant.is_none();
        if let Some(d) = self.drift.grid {
            self.check_le("grid_drift", d, tolerance);
        }
        if let Some(d) = self.drift.scales {
            self.check_le("scale_drift", d, tolerance);
        }
    }

    /// Apply the standing checks and settle `passed`.
    pub fn finish(mut self) -> Self {
        if !self.members.is_empty() {
            let c = self.constant;
            self.check_le("constant_finite", if c.is_finite() { 0.0 } else { 1.0 }, 0.0);
        }
        let total = self.evaluated + self.excluded;
        if total > 0 {
            let share = self.excluded as f64 / total as f64;
            self.check_le("excluded_share", share, MAX_EXCLUDED_SHARE);
        }
        self.passed = self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// One-line human summary.
    pub fn summary_line(&self) -> String {
        let drift = |d: Option<f64>| d.map_or("-".to_string(), |v| format!("{v:.3}"));
        format!(
            "{:<20} {} constant={:.6e} median={:.6e} drift(n)={} drift(du)={}{}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.constant,
            self.median,
            drift(self.drift.grid),
            drift(self.drift.scales),
            if self.provisional { " provisional" } else { "" }
        )
    }
}

fn profile(ratios: &[f64]) -> Vec<[f64; 2]> {
    let block = ratios.len().div_ceil(PROFILE_POINTS).max(1);
    ratios
        .chunks(block)
        .enumerate()
        .map(|(i, c)| [(i * block) as f64, c.iter().copied().fold(0.0, f64::max)])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    name: &'a str,
    passed: bool,
    provisional: bool,
    constant: f64,
    median: f64,
    grid_drift: Option<f64>,
    scale_drift: Option<f64>,
    excluded: usize,
    evaluated: usize,
    failed_checks: String,
}

#[derive(Serialize)]
struct MemberRow<'a> {
    report: &'a str,
    label: &'a str,
    lhs: f64,
    rhs: f64,
    ratio: f64,
    median: f64,
    excluded: usize,
}

/// Write one file per report plus `summary.csv`; returns the files written.
pub fn write_bundle(reports: &[Report], dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for r in reports {
        match format {
            OutputFormat::Json => {
                let path = dir.join(format!("{}.json", r.name));
                fs::write(&path, serde_json::to_string_pretty(r)?)?;
                written.push(path);
            }
            OutputFormat::Csv => {
                let path = dir.join(format!("{}.csv", r.name));
                let mut w = csv::Writer::from_path(&path)?;
                for m in &r.members {
                    w.serialize(MemberRow {
                        report: &r.name,
                        label: &m.label,
                        lhs: m.lhs,
                        rhs: m.rhs,
                        ratio: m.ratio,
                        median: m.median,
                        excluded: m.excluded,
                    })?;
                }
                w.flush()?;
                written.push(path);
                if !r.records.is_empty() {
                    let path = dir.join(format!("{}_records.csv", r.name));
                    let mut w = csv::Writer::from_path(&path)?;
                    let keys: Vec<&String> = r
                        .records
                        .iter()
                        .flat_map(|rec| rec.values.keys())
                        .collect::<std::collections::BTreeSet<_>>()
                        .into_iter()
                        .collect();
                    let mut header = vec!["label".to_string()];
                    header.extend(keys.iter().map(|k| k.to_string()));
                    w.write_record(&header)?;
                    for rec in &r.records {
                        let mut row = vec![rec.label.clone()];
                        row.extend(keys.iter().map(|k| rec.values.get(*k).map_or(String::new(), f64::to_string)));
                        w.write_record(&row)?;
                    }
                    w.flush()?;
                    written.push(path);
                }
            }
        }
        if !r.profile.is_empty() {
            let path = dir.join(format!("{}_profile.csv", r.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["x", "ratio"])?;
            for [x, q] in &r.profile {
                w.write_record([x.to_string(), q.to_string()])?;
            }
            w.flush()?;
            written.push(path);
        }
    }
    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for r in reports {
        w.serialize(SummaryRow {
            name: &r.name,
            passed: r.passed,
            provisional: r.provisional,
            constant: r.constant,
            median: r.median,
            grid_drift: r.drift.grid,
            scale_drift: r.drift.scales,
            excluded: r.excluded,
            evaluated: r.evaluated,
            failed_checks: r.failed_checks().iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(";"),
        })?;
    }
    w.flush()?;
    written.push(path);
    Ok(written)
}
