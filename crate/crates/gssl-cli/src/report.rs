//! Report rows, CSV serialization and aggregation.
//!
//! Every row carries the full provenance tuple. Rows are sorted before
//! serialization so the output is independent of execution order, and all
//! values in `report.csv` are deterministic functions of (config, seed).
//! Wall-clock measurements never go into `report.csv`; they live in the
//! separate timings report, which is excluded from the byte-identity
//! guarantee.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;

use gssl::stats::{summarize, Correlation};

/// A metric value: numeric, or explicitly degenerate (e.g. a correlation of
/// a constant vector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricValue {
    Num(f64),
    Degenerate,
}

impl MetricValue {
    pub fn num(self) -> Option<f64> {
        match self {
            MetricValue::Num(v) => Some(v),
            MetricValue::Degenerate => None,
        }
    }
}

impl From<Correlation> for MetricValue {
    fn from(c: Correlation) -> MetricValue {
        match c {
            Correlation::Coefficient(v) => MetricValue::Num(v),
            Correlation::Degenerate => MetricValue::Degenerate,
        }
    }
}

impl std::fmt::Display for MetricValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricValue::Num(v) => write!(f, "{v}"),
            MetricValue::Degenerate => write!(f, "degenerate"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub rq: String,
    pub dataset: String,
    pub seed: u64,
    pub labelled_fraction: f64,
    pub ssl_algo: String,
    pub learner: String,
    pub attack_method: String,
    /// Poison budget as a fraction of l; absent for rows it does not apply to.
    pub budget: Option<f64>,
    pub arm: String,
    pub metric_name: String,
    pub value: MetricValue,
    /// Wall-clock duration; only ever set in timing reports.
    pub duration_s: Option<f64>,
}

impl ReportRow {
    pub const HEADER: &'static str = "rq,dataset,seed,labelled_fraction,ssl_algo,learner,attack_method,budget,arm,metric_name,value,duration_s";

    fn to_csv_line(&self) -> String {
        let budget = self.budget.map(|b| b.to_string()).unwrap_or_default();
        let duration = self.duration_s.map(|d| d.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.rq,
            self.dataset,
            self.seed,
            self.labelled_fraction,
            self.ssl_algo,
            self.learner,
            self.attack_method,
            budget,
            self.arm,
            self.metric_name,
            self.value,
            duration
        )
    }

    /// Grouping key: everything except the seed and the measured value.
    fn group_key(&self) -> (String, String, String, String, String, String, String, String) {
        (
            self.rq.clone(),
            self.dataset.clone(),
            format!("{}", self.labelled_fraction),
            self.ssl_algo.clone(),
            self.learner.clone(),
            self.attack_method.clone(),
            self.budget.map(|b| b.to_string()).unwrap_or_default(),
            format!("{}|{}", self.arm, self.metric_name),
        )
    }

    fn sort_key(&self) -> (String, String, u64, String, String, String, String, String, String, String) {
        (
            self.rq.clone(),
            self.dataset.clone(),
            self.seed,
            format!("{:020.12}", self.labelled_fraction),
            self.ssl_algo.clone(),
            self.learner.clone(),
            self.attack_method.clone(),
            self.budget.map(|b| format!("{b:020.12}")).unwrap_or_default(),
            self.arm.clone(),
            self.metric_name.clone(),
        )
    }
}

/// An append-only collection of rows plus the configuration that produced
/// them.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config_json: String,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn new(config_json: String) -> ExperimentReport {
        ExperimentReport {
            config_json,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = ReportRow>) {
        self.rows.extend(rows);
    }

    /// CSV with one comment line echoing the effective config, then a header
    /// row, then rows sorted by their provenance tuple.
    pub fn to_csv_string(&self) -> String {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut out = String::new();
        let _ = writeln!(out, "# config: {}", self.config_json);
        let _ = writeln!(out, "{}", ReportRow::HEADER);
        for row in &rows {
            let _ = writeln!(out, "{}", row.to_csv_line());
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> anyhow::Result<()> {
        fs::write(path, self.to_csv_string())
            .with_context(|| format!("cannot write {}", path.display()))
    }

    /// Per-group summary over seeds: count, degenerate count, mean, median,
    /// population std, min, max of the numeric values.
    pub fn aggregate_csv(&self) -> String {
        let mut groups: Vec<(_, Vec<&ReportRow>)> = Vec::new();
        let mut sorted = self.rows.iter().collect::<Vec<_>>();
        sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        for row in sorted {
            let key = row.group_key();
            match groups.last_mut() {
                Some((k, v)) if *k == key => v.push(row),
                _ => groups.push((key, vec![row])),
            }
        }
        let mut out = String::from(
            "rq,dataset,labelled_fraction,ssl_algo,learner,attack_method,budget,arm,metric_name,count,degenerate,mean,median,std,min,max\n",
        );
        for (key, rows) in groups {
            let values: Vec<f64> = rows.iter().filter_map(|r| r.value.num()).collect();
            let degenerate = rows.len() - values.len();
            let (arm, metric) = key.7.split_once('|').unwrap_or(("", ""));
            let stats = if values.is_empty() {
                ",,,,".to_string()
            } else {
                let s = summarize(&values).expect("non-empty numeric values");
                format!("{},{},{},{},{}", s.mean, s.median, s.std, s.min, s.max)
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                key.0, key.1, key.2, key.3, key.4, key.5, key.6, arm, metric,
                values.len(),
                degenerate,
                stats
            );
        }
        out
    }
}

/// Parse a report written by [`ExperimentReport::to_csv_string`]. Comment
/// lines are skipped; fields are positional.
pub fn parse_report_csv(text: &str) -> anyhow::Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == ReportRow::HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            anyhow::bail!("line {}: expected 12 fields, found {}", idx + 1, fields.len());
        }
        let parse_opt = |s: &str| -> Option<f64> {
            if s.is_empty() {
                None
            } else {
                s.parse().ok()
            }
        };
        let value = if fields[10] == "degenerate" {
            MetricValue::Degenerate
        } else {
            MetricValue::Num(
                fields[10]
                    .parse()
                    .with_context(|| format!("line {}: bad value {}", idx + 1, fields[10]))?,
            )
        };
        rows.push(ReportRow {
            rq: fields[0].to_string(),
            dataset: fields[1].to_string(),
            seed: fields[2].parse().with_context(|| format!("line {}: bad seed", idx + 1))?,
            labelled_fraction: fields[3]
                .parse()
                .with_context(|| format!("line {}: bad fraction", idx + 1))?,
            ssl_algo: fields[4].to_string(),
            learner: fields[5].to_string(),
            attack_method: fields[6].to_string(),
            budget: parse_opt(fields[7]),
            arm: fields[8].to_string(),
            metric_name: fields[9].to_string(),
            value,
            duration_s: parse_opt(fields[11]),
        });
    }
    Ok(rows)
}
