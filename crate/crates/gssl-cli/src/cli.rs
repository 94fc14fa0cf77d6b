//! Command-line interface: one-shot pipeline commands plus the four study
//! runners. A single JSON config document drives everything; flags override
//! individual fields.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use gssl::attack::{
    apply_plan, greedy_oracle_attack, mir_attack_from_features, random_attack, AttackMethod,
    PoisonPlan,
};
use gssl::dataset::{split_labelled, Dataset, DatasetFormat, SplitSpec};
use gssl::defense::evaluate_countermeasures;
use gssl::pipeline::infer;
use gssl::seeding::derive_seed;
use gssl::ssl::transductive_error_rate;

use crate::config::{DatasetSource, ExperimentConfig};
use crate::harness;
use crate::plot::{emit_plot, PlotKind};
use crate::report::{parse_report_csv, ExperimentReport, MetricValue, ReportRow};

#[derive(Debug, Clone, Copy, ValueEnum)]
#[clap(rename_all = "snake_case")]
enum FormatArg {
    DenseCsv,
    SparseSvmlight,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[clap(rename_all = "snake_case")]
enum MethodArg {
    Mir,
    Random,
    GreedyOracle,
}

#[derive(Debug, Parser)]
#[command(
    name = "gssl",
    about = "Graph-based semi-supervised learning: inference, influence ranking, label-poisoning attacks, countermeasures and study pipelines"
)]
struct Cli {
    /// JSON experiment configuration; defaults apply for missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for reports and artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the dataset with a file.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// File format of --dataset.
    #[arg(long, global = true)]
    format: Option<FormatArg>,
    /// Declared feature count for sparse_svmlight files.
    #[arg(long, global = true)]
    svmlight_dim: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run transductive inference and report error rates and predictions.
    Infer {
        /// Labelled fraction of the split.
        #[arg(long, default_value_t = 0.25)]
        fraction: f64,
    },
    /// Compute the influence table and MIR ranking of the labelled inputs.
    Influence {
        #[arg(long, default_value_t = 0.25)]
        fraction: f64,
    },
    /// Select and apply a poison plan, reporting pre/post error rates.
    Attack {
        #[arg(long, value_enum, default_value_t = MethodArg::Mir)]
        method: MethodArg,
        /// Poison budget as a fraction of the labelled inputs.
        #[arg(long, default_value_t = 0.10)]
        budget: f64,
        #[arg(long, default_value_t = 0.25)]
        fraction: f64,
    },
    /// Attack, then compare the relabelling and additional-labelling
    /// countermeasures against no defense.
    Defend {
        #[arg(long, default_value_t = 0.10)]
        budget: f64,
        #[arg(long, default_value_t = 0.25)]
        fraction: f64,
        /// Audit budget; defaults to one third of the poisoned labels.
        #[arg(long)]
        audit: Option<usize>,
    },
    /// Correlation between MIR and single-flip transductive error.
    Rq1,
    /// Inductive error under an increasing poison budget.
    Rq2,
    /// Attack comparison: effectiveness and selection time.
    Rq3,
    /// Countermeasure comparison at one third of the poison budget.
    Rq4,
    /// Render a previously written report.csv.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
    },
}

/// Entry point shared by `main` and the test suite.
pub fn run<I, T>(args: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let cfg = resolve_config(&cli)?;
    fs::create_dir_all(&cli.out)
        .with_context(|| format!("cannot create output dir {}", cli.out.display()))?;
    match &cli.command {
        Command::Infer { fraction } => cmd_infer(&cfg, &cli.out, *fraction),
        Command::Influence { fraction } => cmd_influence(&cfg, &cli.out, *fraction),
        Command::Attack {
            method,
            budget,
            fraction,
        } => cmd_attack(&cfg, &cli.out, *method, *budget, *fraction),
        Command::Defend {
            budget,
            fraction,
            audit,
        } => cmd_defend(&cfg, &cli.out, *budget, *fraction, *audit),
        Command::Rq1 => {
            let report = harness::run_rq1(&cfg)?;
            write_study(&cli.out, report, None)
        }
        Command::Rq2 => {
            let report = harness::run_rq2(&cfg)?;
            write_study(&cli.out, report, None)
        }
        Command::Rq3 => {
            let (report, timings) = harness::run_rq3(&cfg)?;
            write_study(&cli.out, report, Some(timings))
        }
        Command::Rq4 => {
            let report = harness::run_rq4(&cfg)?;
            write_study(&cli.out, report, None)
        }
        Command::Plot { report, kind } => cmd_plot(report, *kind, &cli.out),
    }
}

fn resolve_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(path) = &cli.dataset {
        let format = match cli.format.unwrap_or(FormatArg::DenseCsv) {
            FormatArg::DenseCsv => DatasetFormat::DenseCsv,
            FormatArg::SparseSvmlight => DatasetFormat::SparseSvmlight {
                dimension: cli.svmlight_dim,
            },
        };
        cfg.dataset = DatasetSource::File {
            path: path.clone(),
            format,
            test_path: None,
        };
    }
    Ok(cfg)
}

fn one_shot_split(
    cfg: &ExperimentConfig,
    command: &str,
    fraction: f64,
) -> anyhow::Result<(Dataset, u64)> {
    let pool = harness::training_pool(cfg)?;
    let seed = derive_seed(cfg.base_seed, command, 0);
    let split = split_labelled(
        &pool,
        &SplitSpec {
            labelled_fraction: fraction,
            seed: derive_seed(seed, "split", 0),
        },
    )?;
    Ok((split, seed))
}

fn write_study(
    out: &Path,
    report: ExperimentReport,
    timings: Option<ExperimentReport>,
) -> anyhow::Result<()> {
    let report_path = out.join("report.csv");
    report.write_csv(&report_path)?;
    let summary_path = out.join("summary.csv");
    fs::write(&summary_path, report.aggregate_csv())?;
    println!("wrote {}", report_path.display());
    println!("wrote {}", summary_path.display());
    if let Some(timings) = timings {
        let timings_path = out.join("timings.csv");
        timings.write_csv(&timings_path)?;
        fs::write(out.join("timings_summary.csv"), timings.aggregate_csv())?;
        println!("wrote {} (wall-clock; not covered by determinism)", timings_path.display());
    }
    Ok(())
}

fn cmd_infer(cfg: &ExperimentConfig, out: &Path, fraction: f64) -> anyhow::Result<()> {
    let (split, seed) = one_shot_split(cfg, "cmd-infer", fraction)?;
    let mut report = ExperimentReport::new(cfg.canonical_json());
    let dataset_name = cfg.dataset.name();
    for &algo in &cfg.algorithms {
        let result = infer(&split, &cfg.kernel, algo, &cfg.ssl)?;
        let err = transductive_error_rate(&result, &split)?;
        let base = ReportRow {
            rq: "infer".into(),
            dataset: dataset_name.clone(),
            seed,
            labelled_fraction: fraction,
            ssl_algo: algo.to_string(),
            learner: String::new(),
            attack_method: String::new(),
            budget: None,
            arm: String::new(),
            metric_name: String::new(),
            value: MetricValue::Num(0.0),
            duration_s: None,
        };
        report.extend([
            ReportRow {
                metric_name: "transductive_error".into(),
                value: MetricValue::Num(err),
                ..base.clone()
            },
            ReportRow {
                metric_name: "iterations_used".into(),
                value: MetricValue::Num(result.iterations_used as f64),
                ..base.clone()
            },
            ReportRow {
                metric_name: "converged".into(),
                value: MetricValue::Num(if result.converged { 1.0 } else { 0.0 }),
                ..base.clone()
            },
            ReportRow {
                metric_name: "tie_count".into(),
                value: MetricValue::Num(result.tie_count as f64),
                ..base
            },
        ]);

        // Per-input predictions in dataset order.
        let mut lines: Vec<(usize, String)> = Vec::with_capacity(split.n());
        let l = split.l();
        for (j, &idx) in split.labelled_idx().iter().enumerate() {
            lines.push((
                idx,
                format!(
                    "{idx},{},{},{}",
                    split.truth_labels()[idx],
                    result.predicted[j],
                    result.scores[j]
                ),
            ));
        }
        for (j, &idx) in split.unlabelled_idx().iter().enumerate() {
            lines.push((
                idx,
                format!(
                    "{idx},{},{},{}",
                    split.truth_labels()[idx],
                    result.predicted[l + j],
                    result.scores[l + j]
                ),
            ));
        }
        lines.sort_by_key(|(idx, _)| *idx);
        let mut csv = String::from("dataset_index,truth,predicted,score\n");
        for (_, line) in lines {
            csv.push_str(&line);
            csv.push('\n');
        }
        let path = out.join(format!("predictions_{algo}.csv"));
        fs::write(&path, csv)?;
        println!("wrote {}", path.display());
    }
    report.write_csv(&out.join("report.csv"))?;
    println!("wrote {}", out.join("report.csv").display());
    Ok(())
}

fn cmd_influence(cfg: &ExperimentConfig, out: &Path, fraction: f64) -> anyhow::Result<()> {
    let (split, seed) = one_shot_split(cfg, "cmd-influence", fraction)?;
    let graph = harness::build_graph(cfg, &split, false)?;
    let mir_path = out.join("mir.csv");
    fs::write(&mir_path, graph.ranking.to_csv(&split))?;
    println!("wrote {}", mir_path.display());

    let total: usize = graph.ranking.mir.iter().sum();
    let max = graph.ranking.mir.iter().copied().max().unwrap_or(0);
    let mut report = ExperimentReport::new(cfg.canonical_json());
    let base = ReportRow {
        rq: "influence".into(),
        dataset: cfg.dataset.name(),
        seed,
        labelled_fraction: fraction,
        ssl_algo: String::new(),
        learner: String::new(),
        attack_method: String::new(),
        budget: None,
        arm: String::new(),
        metric_name: String::new(),
        value: MetricValue::Num(0.0),
        duration_s: None,
    };
    report.extend([
        ReportRow {
            metric_name: "mir_total".into(),
            value: MetricValue::Num(total as f64),
            ..base.clone()
        },
        ReportRow {
            metric_name: "mir_max".into(),
            value: MetricValue::Num(max as f64),
            ..base.clone()
        },
        ReportRow {
            metric_name: "major_influenced_fraction".into(),
            value: MetricValue::Num(total as f64 / split.u() as f64),
            ..base
        },
    ]);
    report.write_csv(&out.join("report.csv"))?;
    println!("wrote {}", out.join("report.csv").display());
    Ok(())
}

fn cmd_attack(
    cfg: &ExperimentConfig,
    out: &Path,
    method: MethodArg,
    budget: f64,
    fraction: f64,
) -> anyhow::Result<()> {
    let (split, seed) = one_shot_split(cfg, "cmd-attack", fraction)?;
    let k = (budget * split.l() as f64).round() as usize;
    let plan: PoisonPlan = match method {
        MethodArg::Mir => mir_attack_from_features(&split, &cfg.kernel, k)?,
        MethodArg::Random => random_attack(&split, k, derive_seed(seed, "random-attack", 0))?,
        MethodArg::GreedyOracle => greedy_oracle_attack(&split, &cfg.kernel, k)?,
    };
    let plan_path = out.join("plan.json");
    fs::write(&plan_path, serde_json::to_string_pretty(&plan)?)?;
    println!(
        "wrote {} (selected {} flips in {:.4}s)",
        plan_path.display(),
        plan.budget_k,
        plan.selection_time_s
    );

    let poisoned = apply_plan(&split, &plan)?;
    let mut report = ExperimentReport::new(cfg.canonical_json());
    for &algo in &cfg.algorithms {
        let clean = infer(&split, &cfg.kernel, algo, &cfg.ssl)?;
        let attacked = infer(&poisoned, &cfg.kernel, algo, &cfg.ssl)?;
        let base = ReportRow {
            rq: "attack".into(),
            dataset: cfg.dataset.name(),
            seed,
            labelled_fraction: fraction,
            ssl_algo: algo.to_string(),
            learner: String::new(),
            attack_method: plan.method.to_string(),
            budget: Some(budget),
            arm: String::new(),
            metric_name: String::new(),
            value: MetricValue::Num(0.0),
            duration_s: None,
        };
        report.extend([
            ReportRow {
                metric_name: "clean_transductive_error".into(),
                value: MetricValue::Num(transductive_error_rate(&clean, &split)?),
                ..base.clone()
            },
            ReportRow {
                metric_name: "poisoned_transductive_error".into(),
                value: MetricValue::Num(transductive_error_rate(&attacked, &poisoned)?),
                ..base
            },
        ]);
    }
    report.write_csv(&out.join("report.csv"))?;
    println!("wrote {}", out.join("report.csv").display());
    Ok(())
}

fn cmd_defend(
    cfg: &ExperimentConfig,
    out: &Path,
    budget: f64,
    fraction: f64,
    audit: Option<usize>,
) -> anyhow::Result<()> {
    let (split, seed) = one_shot_split(cfg, "cmd-defend", fraction)?;
    let graph = harness::build_graph(cfg, &split, false)?;
    let k = (budget * split.l() as f64).round() as usize;
    let m = audit.unwrap_or((k as f64 / 3.0).round() as usize);
    let plan = gssl::attack::mir_attack(&split, &graph.ranking, k)?;
    let poisoned = apply_plan(&split, &plan)?;

    let mut report = ExperimentReport::new(cfg.canonical_json());
    for &algo in &cfg.algorithms {
        let outcome = evaluate_countermeasures(
            &split,
            &poisoned,
            &graph.ranking,
            m,
            &cfg.kernel,
            algo,
            &cfg.ssl,
            derive_seed(seed, "defend", 0),
        )?;
        let base = ReportRow {
            rq: "defend".into(),
            dataset: cfg.dataset.name(),
            seed,
            labelled_fraction: fraction,
            ssl_algo: algo.to_string(),
            learner: String::new(),
            attack_method: AttackMethod::Mir.to_string(),
            budget: Some(budget),
            arm: String::new(),
            metric_name: "transductive_error".into(),
            value: MetricValue::Num(0.0),
            duration_s: None,
        };
        for (arm, err) in [
            ("clean", outcome.err_clean),
            ("none", outcome.err_none),
            ("relabel_mir", outcome.err_relabel),
            ("label_additional", outcome.err_additional),
        ] {
            report.push(ReportRow {
                arm: arm.into(),
                value: MetricValue::Num(err),
                ..base.clone()
            });
        }
    }
    report.write_csv(&out.join("report.csv"))?;
    println!("wrote {}", out.join("report.csv").display());
    println!("audited {m} of {k} poisoned labels");
    Ok(())
}

fn cmd_plot(report_path: &Path, kind: PlotKind, out: &Path) -> anyhow::Result<()> {
    let text = fs::read_to_string(report_path)
        .with_context(|| format!("cannot read {}", report_path.display()))?;
    let rows = parse_report_csv(&text)?;
    let (csv, svg) = emit_plot(&rows, kind, out)?;
    println!("wrote {}", csv.display());
    println!("wrote {}", svg.display());
    Ok(())
}
