//! Chart emission. Every plot writes two files: the exact plotted data as
//! CSV and a simple self-contained SVG rendering of it. Both are
//! deterministic functions of the report rows.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use gssl::stats::median;

use crate::report::ReportRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum PlotKind {
    /// One polyline per (metric, solver, learner, attack) series, error rate
    /// against poison budget, median over seeds.
    ErrorVsBudget,
    /// One bar per (metric, solver, labelled fraction), median correlation
    /// over seeds.
    CorrelationBar,
}

impl PlotKind {
    pub fn stem(self) -> &'static str {
        match self {
            PlotKind::ErrorVsBudget => "error_vs_budget",
            PlotKind::CorrelationBar => "correlation_bar",
        }
    }
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = [
    "#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#d68910", "#16a085", "#7f8c8d", "#2c3e50",
];

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 200.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

fn svg_header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{title}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0
    )
}

fn axes(x_label: &str, y_label: &str) -> String {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    format!(
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>\n\
         <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>\n\
         <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{y_label}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 16.0,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
}

fn x_pos(v: f64, lo: f64, hi: f64) -> f64 {
    let span = if hi > lo { hi - lo } else { 1.0 };
    MARGIN_L + (v - lo) / span * (WIDTH - MARGIN_L - MARGIN_R)
}

fn y_pos(v: f64, lo: f64, hi: f64) -> f64 {
    let span = if hi > lo { hi - lo } else { 1.0 };
    HEIGHT - MARGIN_B - (v - lo) / span * (HEIGHT - MARGIN_T - MARGIN_B)
}

fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    let x_lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y_lo = 0.0f64.min(ys.iter().copied().fold(f64::INFINITY, f64::min));
    let y_hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(1e-9) * 1.08;

    let mut svg = svg_header(title);
    svg.push_str(&axes(x_label, y_label));
    for t in ticks(x_lo, x_hi, 4) {
        let x = x_pos(t, x_lo, x_hi);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
             <text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{t:.3}</text>",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 6.0,
            HEIGHT - MARGIN_B + 20.0
        );
    }
    for t in ticks(y_lo, y_hi, 5) {
        let y = y_pos(t, y_lo, y_hi);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{t:.3}</text>",
            MARGIN_L - 6.0,
            MARGIN_L,
            MARGIN_L - 10.0,
            y + 4.0
        );
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", x_pos(x, x_lo, x_hi), y_pos(y, y_lo, y_hi)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            pts.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                x_pos(x, x_lo, x_hi),
                y_pos(y, y_lo, y_hi)
            );
        }
        let ly = MARGIN_T + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            WIDTH - MARGIN_R + 10.0,
            WIDTH - MARGIN_R + 34.0,
            WIDTH - MARGIN_R + 40.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bar_chart(title: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    let y_lo = 0.0f64.min(bars.iter().map(|b| b.1).fold(f64::INFINITY, f64::min));
    let y_hi = bars
        .iter()
        .map(|b| b.1)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1e-9)
        * 1.08;
    let mut svg = svg_header(title);
    svg.push_str(&axes("", y_label));
    for t in ticks(y_lo, y_hi, 5) {
        let y = y_pos(t, y_lo, y_hi);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{t:.3}</text>",
            MARGIN_L - 6.0,
            MARGIN_L,
            MARGIN_L - 10.0,
            y + 4.0
        );
    }
    let plot_width = WIDTH - MARGIN_L - MARGIN_R;
    let slot = plot_width / bars.len() as f64;
    let bar_w = (slot * 0.6).min(60.0);
    let base = y_pos(0.0f64.max(y_lo), y_lo, y_hi);
    for (i, (label, value)) in bars.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let cx = MARGIN_L + slot * (i as f64 + 0.5);
        let top = y_pos(*value, y_lo, y_hi);
        let (y, h) = if top < base { (top, base - top) } else { (base, top - base) };
        let _ = writeln!(
            svg,
            "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"{bar_w:.2}\" height=\"{h:.2}\" fill=\"{color}\"/>\n\
             <text x=\"{cx:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{label}</text>\n\
             <text x=\"{cx:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{value:.3}</text>",
            cx - bar_w / 2.0,
            HEIGHT - MARGIN_B + 14.0,
            y - 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn series_label(parts: &[&str]) -> String {
    let joined: Vec<&str> = parts.iter().copied().filter(|p| !p.is_empty()).collect();
    joined.join("/")
}

/// Render a report into `<stem>.csv` and `<stem>.svg` under `out_dir`.
pub fn emit_plot(
    rows: &[ReportRow],
    kind: PlotKind,
    out_dir: &Path,
) -> anyhow::Result<(PathBuf, PathBuf)> {
    let (csv, svg) = match kind {
        PlotKind::ErrorVsBudget => error_vs_budget(rows)?,
        PlotKind::CorrelationBar => correlation_bar(rows)?,
    };
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let csv_path = out_dir.join(format!("{}.csv", kind.stem()));
    let svg_path = out_dir.join(format!("{}.svg", kind.stem()));
    fs::write(&csv_path, csv).with_context(|| format!("cannot write {}", csv_path.display()))?;
    fs::write(&svg_path, svg).with_context(|| format!("cannot write {}", svg_path.display()))?;
    Ok((csv_path, svg_path))
}

fn error_vs_budget(rows: &[ReportRow]) -> anyhow::Result<(String, String)> {
    // Median over seeds per (series key, budget).
    let mut grouped: Vec<((String, String, String, String), Vec<(f64, f64)>)> = Vec::new();
    for row in rows {
        let (Some(budget), Some(value)) = (row.budget, row.value.num()) else {
            continue;
        };
        if !row.metric_name.ends_with("error") {
            continue;
        }
        let key = (
            row.metric_name.clone(),
            row.ssl_algo.clone(),
            row.learner.clone(),
            row.attack_method.clone(),
        );
        match grouped.iter_mut().find(|(k, _)| *k == key) {
            Some((_, points)) => points.push((budget, value)),
            None => grouped.push((key, vec![(budget, value)])),
        }
    }
    if grouped.is_empty() {
        bail!("no rows for plot");
    }
    grouped.sort_by(|a, b| a.0.cmp(&b.0));
    let mut csv = String::from("metric_name,ssl_algo,learner,attack_method,budget,median_value\n");
    let mut series = Vec::new();
    for ((metric, algo, learner, method), raw) in grouped {
        let mut budgets: Vec<f64> = raw.iter().map(|p| p.0).collect();
        budgets.sort_by(f64::total_cmp);
        budgets.dedup();
        let mut points = Vec::new();
        for b in budgets {
            let vals: Vec<f64> = raw
                .iter()
                .filter(|p| p.0 == b)
                .map(|p| p.1)
                .collect();
            let med = median(&vals)?;
            let _ = writeln!(csv, "{metric},{algo},{learner},{method},{b},{med}");
            points.push((b, med));
        }
        series.push(Series {
            label: series_label(&[&metric, &algo, &learner, &method]),
            points,
        });
    }
    let svg = line_chart(
        "error rate vs. poison budget (median over seeds)",
        "poison budget (fraction of labelled inputs)",
        "error rate",
        &series,
    );
    Ok((csv, svg))
}

fn correlation_bar(rows: &[ReportRow]) -> anyhow::Result<(String, String)> {
    let mut grouped: Vec<((String, String, String), Vec<f64>, usize)> = Vec::new();
    for row in rows {
        if row.metric_name != "kendall_tau" && row.metric_name != "pearson_r" {
            continue;
        }
        let key = (
            row.metric_name.clone(),
            row.ssl_algo.clone(),
            format!("{}", row.labelled_fraction),
        );
        let entry = match grouped.iter_mut().find(|(k, _, _)| *k == key) {
            Some(e) => e,
            None => {
                grouped.push((key, Vec::new(), 0));
                grouped.last_mut().unwrap()
            }
        };
        match row.value.num() {
            Some(v) => entry.1.push(v),
            None => entry.2 += 1,
        }
    }
    if grouped.is_empty() {
        bail!("no rows for plot");
    }
    grouped.sort_by(|a, b| a.0.cmp(&b.0));
    let mut csv = String::from("metric_name,ssl_algo,labelled_fraction,median_value,defined,degenerate\n");
    let mut bars = Vec::new();
    for ((metric, algo, fraction), values, degenerate) in grouped {
        if values.is_empty() {
            let _ = writeln!(csv, "{metric},{algo},{fraction},,0,{degenerate}");
            continue;
        }
        let med = median(&values)?;
        let _ = writeln!(
            csv,
            "{metric},{algo},{fraction},{med},{},{degenerate}",
            values.len()
        );
        bars.push((series_label(&[&metric, &algo, &fraction]), med));
    }
    if bars.is_empty() {
        bail!("no defined correlation values to plot");
    }
    let svg = bar_chart(
        "correlation between influence range and single-flip error",
        "correlation coefficient",
        &bars,
    );
    Ok((csv, svg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::MetricValue;

    fn row(budget: f64, seed: u64, value: f64) -> ReportRow {
        ReportRow {
            rq: "rq2".into(),
            dataset: "gaussian_blobs".into(),
            seed,
            labelled_fraction: 0.25,
            ssl_algo: "propagation".into(),
            learner: "mlp".into(),
            attack_method: "mir".into(),
            budget: Some(budget),
            arm: String::new(),
            metric_name: "inductive_error".into(),
            value: MetricValue::Num(value),
            duration_s: None,
        }
    }

    #[test]
    fn empty_reports_are_rejected() {
        let err = error_vs_budget(&[]).unwrap_err();
        assert!(err.to_string().contains("no rows"));
    }

    #[test]
    fn medians_are_taken_over_seeds() {
        let rows = vec![row(0.1, 1, 0.2), row(0.1, 2, 0.4), row(0.1, 3, 0.3)];
        let (csv, svg) = error_vs_budget(&rows).unwrap();
        assert!(csv.contains("0.1,0.3"), "csv: {csv}");
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn one_series_per_combination() {
        let mut rows = vec![row(0.05, 1, 0.1), row(0.1, 1, 0.2)];
        let mut other = row(0.05, 1, 0.15);
        other.learner = "forest".into();
        rows.push(other);
        let (csv, svg) = error_vs_budget(&rows).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(csv.lines().count(), 1 + 3);
    }

    #[test]
    fn correlation_bars_skip_degenerate_values() {
        let mut a = row(0.1, 1, 0.6);
        a.metric_name = "kendall_tau".into();
        a.budget = None;
        let mut b = a.clone();
        b.seed = 2;
        b.value = MetricValue::Degenerate;
        let (csv, svg) = correlation_bar(&[a, b]).unwrap();
        assert!(csv.contains("0.6,1,1"), "csv: {csv}");
        assert!(svg.contains("<rect"));
    }
}
