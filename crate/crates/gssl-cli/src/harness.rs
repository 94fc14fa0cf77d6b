//! The experiment harness: the four study pipelines over seeded repetitions.
//!
//! Every repetition derives its seeds from `(base_seed, study tag, indices)`,
//! so a fixed configuration reproduces its reports byte for byte. The
//! synthetic training sample is drawn once per study and only the
//! labelled/unlabelled split varies across repetitions.

use anyhow::Context;
use ndarray::Array2;

use gssl::attack::{apply_plan, greedy_oracle_attack, mir_attack, mir_attack_from_features, random_attack, AttackMethod, PoisonPlan};
use gssl::dataset::{generate_synthetic, load_dataset, split_labelled, Dataset, Label, SplitSpec, SyntheticSpec};
use gssl::defense::{label_additional, relabel_top_mir};
use gssl::inductive::{
    induction_training_set, inductive_error_rate, train_forest, train_mlp, LearnerKind, Model,
};
use gssl::influence::{direct_influence, mir, MirVector};
use gssl::kernel::{build_transition, normalized_adjacency, rbf_weights, TransitionMatrix};
use gssl::pipeline::{infer, SslAlgorithm};
use gssl::seeding::derive_seed;
use gssl::ssl::{
    label_propagation_iterative, label_spreading, transductive_error_rate, InferenceResult,
};
use gssl::stats::{kendall_tau, pearson_r};

use crate::config::{DatasetSource, ExperimentConfig};
use crate::report::{ExperimentReport, MetricValue, ReportRow};

/// Load or generate the full (unsplit) training inputs.
pub fn training_pool(cfg: &ExperimentConfig) -> anyhow::Result<Dataset> {
    match &cfg.dataset {
        DatasetSource::Synthetic(spec) => {
            let seeded = SyntheticSpec {
                seed: derive_seed(cfg.base_seed, "train-data", 0),
                ..*spec
            };
            Ok(generate_synthetic(&seeded)?)
        }
        DatasetSource::File { path, format, .. } => {
            load_dataset(path, *format).context("loading training dataset")
        }
    }
}

/// Load or generate the held-out test set, when one is available.
pub fn test_pool(cfg: &ExperimentConfig) -> anyhow::Result<Option<Dataset>> {
    match &cfg.dataset {
        DatasetSource::Synthetic(spec) => {
            let seeded = SyntheticSpec {
                n_per_class: cfg.test_per_class,
                seed: derive_seed(cfg.base_seed, "test-data", 0),
                ..*spec
            };
            Ok(Some(generate_synthetic(&seeded)?))
        }
        DatasetSource::File { test_path, format, .. } => match test_path {
            Some(p) => Ok(Some(load_dataset(p, *format).context("loading test dataset")?)),
            None => Ok(None),
        },
    }
}

/// Seed of one repetition of one study cell.
pub fn trial_seed(base: u64, tag: &str, fraction_idx: usize, rep: usize) -> u64 {
    derive_seed(
        derive_seed(base, tag, fraction_idx as u64),
        "rep",
        rep as u64,
    )
}

/// The label-independent graph state of one split, shared by every attack,
/// arm and budget evaluated on it.
pub struct GraphState {
    pub transition: TransitionMatrix,
    pub adjacency: Option<Array2<f64>>,
    pub ranking: MirVector,
}

pub fn build_graph(
    cfg: &ExperimentConfig,
    split: &Dataset,
    need_adjacency: bool,
) -> anyhow::Result<GraphState> {
    let weights = rbf_weights(split.ssl_ordered_features().view(), &cfg.kernel)?;
    let transition = build_transition(&weights, split.l())?;
    let adjacency = if need_adjacency {
        Some(normalized_adjacency(&weights)?)
    } else {
        None
    };
    let ranking = mir(&direct_influence(&transition)?)?;
    Ok(GraphState {
        transition,
        adjacency,
        ranking,
    })
}

fn infer_prebuilt(
    cfg: &ExperimentConfig,
    graph: &GraphState,
    algorithm: SslAlgorithm,
    labels: &[Label],
) -> anyhow::Result<InferenceResult> {
    let result = match algorithm {
        SslAlgorithm::Propagation => {
            label_propagation_iterative(&graph.transition, labels, &cfg.ssl)?
        }
        SslAlgorithm::Spreading => {
            let s = graph
                .adjacency
                .as_ref()
                .expect("adjacency requested for spreading");
            label_spreading(s, labels, &cfg.ssl)?
        }
    };
    Ok(result)
}

fn train_learner(
    cfg: &ExperimentConfig,
    learner: LearnerKind,
    features: ndarray::ArrayView2<'_, f64>,
    labels: &[Label],
    seed: u64,
) -> anyhow::Result<Box<dyn Model>> {
    Ok(match learner {
        LearnerKind::Mlp => {
            let mlp_cfg = gssl::inductive::MlpConfig { seed, ..cfg.mlp };
            Box::new(train_mlp(features, labels, &mlp_cfg)?)
        }
        LearnerKind::Forest => {
            let forest_cfg = gssl::inductive::ForestConfig { seed, ..cfg.forest };
            Box::new(train_forest(features, labels, &forest_cfg)?)
        }
    })
}

fn row_template(rq: &str, dataset: &str, seed: u64, fraction: f64) -> ReportRow {
    ReportRow {
        rq: rq.to_string(),
        dataset: dataset.to_string(),
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
    }
}

fn budget_to_k(budget: f64, l: usize) -> usize {
    (budget * l as f64).round() as usize
}

/// Correlation between MIR and the per-input damage of single flips.
///
/// For every labelled input alone: flip it, rerun the solver, record the
/// transductive error. The study then correlates the MIR vector with the
/// error vector, once per solver.
pub fn run_rq1(cfg: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg.canonical_json());
    let pool = training_pool(cfg)?;
    let dataset_name = cfg.dataset.name();
    for (fi, &fraction) in cfg.labelled_fractions.iter().enumerate() {
        for rep in 0..cfg.repetitions {
            let seed = trial_seed(cfg.base_seed, "rq1", fi, rep);
            let split = split_labelled(
                &pool,
                &SplitSpec {
                    labelled_fraction: fraction,
                    seed: derive_seed(seed, "split", 0),
                },
            )?;
            let need_s = cfg.algorithms.contains(&SslAlgorithm::Spreading);
            let graph = build_graph(cfg, &split, need_s)?;
            let mir_values: Vec<f64> = graph.ranking.mir.iter().map(|&c| c as f64).collect();
            for &algo in &cfg.algorithms {
                let clean = infer_prebuilt(cfg, &graph, algo, split.observed_labels())?;
                let clean_err = transductive_error_rate(&clean, &split)?;
                let mut flip_errors = Vec::with_capacity(split.l());
                for j in 0..split.l() {
                    let mut labels = split.observed_labels().to_vec();
                    labels[j] = labels[j].flipped();
                    let result = infer_prebuilt(cfg, &graph, algo, &labels)?;
                    flip_errors.push(transductive_error_rate(&result, &split)?);
                }
                let mut base = row_template("rq1", &dataset_name, seed, fraction);
                base.ssl_algo = algo.to_string();
                report.push(ReportRow {
                    metric_name: "kendall_tau".into(),
                    value: kendall_tau(&mir_values, &flip_errors)?.into(),
                    ..base.clone()
                });
                report.push(ReportRow {
                    metric_name: "pearson_r".into(),
                    value: pearson_r(&mir_values, &flip_errors)?.into(),
                    ..base.clone()
                });
                report.push(ReportRow {
                    metric_name: "clean_transductive_error".into(),
                    value: MetricValue::Num(clean_err),
                    ..base
                });
            }
        }
    }
    Ok(report)
}

/// Inductive error under an increasing influence-driven poison budget.
pub fn run_rq2(cfg: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg.canonical_json());
    let pool = training_pool(cfg)?;
    let test = test_pool(cfg)?
        .context("the induction study needs a test set (file datasets need test_path)")?;
    let dataset_name = cfg.dataset.name();
    let mut budgets = vec![0.0];
    budgets.extend(cfg.poison_budgets.iter().copied().filter(|&b| b > 0.0));
    for (fi, &fraction) in cfg.labelled_fractions.iter().enumerate() {
        for rep in 0..cfg.repetitions {
            let seed = trial_seed(cfg.base_seed, "rq2", fi, rep);
            let split = split_labelled(
                &pool,
                &SplitSpec {
                    labelled_fraction: fraction,
                    seed: derive_seed(seed, "split", 0),
                },
            )?;
            let need_s = cfg.algorithms.contains(&SslAlgorithm::Spreading);
            let graph = build_graph(cfg, &split, need_s)?;
            for &budget in &budgets {
                let k = budget_to_k(budget, split.l());
                let plan = mir_attack(&split, &graph.ranking, k)?;
                let poisoned = apply_plan(&split, &plan)?;
                for &algo in &cfg.algorithms {
                    let inference =
                        infer_prebuilt(cfg, &graph, algo, poisoned.observed_labels())?;
                    let mut base = row_template("rq2", &dataset_name, seed, fraction);
                    base.ssl_algo = algo.to_string();
                    base.attack_method = AttackMethod::Mir.to_string();
                    base.budget = Some(budget);
                    report.push(ReportRow {
                        metric_name: "transductive_error".into(),
                        value: MetricValue::Num(transductive_error_rate(&inference, &poisoned)?),
                        ..base.clone()
                    });
                    let (features, labels) = induction_training_set(&poisoned, &inference)?;
                    for &learner in &cfg.learners {
                        let model = train_learner(
                            cfg,
                            learner,
                            features.view(),
                            &labels,
                            derive_seed(seed, "learner", k as u64),
                        )?;
                        report.push(ReportRow {
                            learner: learner.to_string(),
                            metric_name: "inductive_error".into(),
                            value: MetricValue::Num(inductive_error_rate(model.as_ref(), &test)?),
                            ..base.clone()
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Effectiveness and efficiency comparison of the three attack methods.
/// Returns the deterministic effectiveness report and the wall-clock timing
/// report separately.
pub fn run_rq3(cfg: &ExperimentConfig) -> anyhow::Result<(ExperimentReport, ExperimentReport)> {
    let mut report = ExperimentReport::new(cfg.canonical_json());
    let pool = training_pool(cfg)?;
    let test = test_pool(cfg)?;
    let dataset_name = cfg.dataset.name();
    let methods = [
        AttackMethod::Mir,
        AttackMethod::Random,
        AttackMethod::GreedyOracle,
    ];
    for (fi, &fraction) in cfg.labelled_fractions.iter().enumerate() {
        for rep in 0..cfg.repetitions {
            let seed = trial_seed(cfg.base_seed, "rq3", fi, rep);
            let split = split_labelled(
                &pool,
                &SplitSpec {
                    labelled_fraction: fraction,
                    seed: derive_seed(seed, "split", 0),
                },
            )?;
            let graph = build_graph(cfg, &split, false)?;
            let l = split.l();
            let k_max = cfg
                .poison_budgets
                .iter()
                .map(|&b| budget_to_k(b, l))
                .max()
                .unwrap_or(0);
            // Greedy selections nest, so one run at the largest budget
            // yields every smaller plan as a prefix.
            let greedy_full = greedy_oracle_attack(&split, &cfg.kernel, k_max)?;

            let clean = infer_prebuilt(cfg, &graph, SslAlgorithm::Propagation, split.observed_labels())?;
            let mut base = row_template("rq3", &dataset_name, seed, fraction);
            base.ssl_algo = SslAlgorithm::Propagation.to_string();
            report.push(ReportRow {
                metric_name: "clean_transductive_error".into(),
                value: MetricValue::Num(transductive_error_rate(&clean, &split)?),
                ..base.clone()
            });

            for &budget in &cfg.poison_budgets {
                let k = budget_to_k(budget, l);
                for method in methods {
                    let plan = match method {
                        AttackMethod::Mir => mir_attack(&split, &graph.ranking, k)?,
                        AttackMethod::Random => {
                            random_attack(&split, k, derive_seed(seed, "random-attack", k as u64))?
                        }
                        AttackMethod::GreedyOracle => PoisonPlan {
                            method: AttackMethod::GreedyOracle,
                            budget_k: k,
                            flips: greedy_full.flips[..k].to_vec(),
                            selection_time_s: 0.0,
                        },
                    };
                    let poisoned = apply_plan(&split, &plan)?;
                    let inference = infer_prebuilt(
                        cfg,
                        &graph,
                        SslAlgorithm::Propagation,
                        poisoned.observed_labels(),
                    )?;
                    let mut base = base.clone();
                    base.attack_method = method.to_string();
                    base.budget = Some(budget);
                    report.push(ReportRow {
                        metric_name: "transductive_error".into(),
                        value: MetricValue::Num(transductive_error_rate(&inference, &poisoned)?),
                        ..base.clone()
                    });
                    if let Some(test) = &test {
                        let (features, labels) = induction_training_set(&poisoned, &inference)?;
                        for &learner in &cfg.learners {
                            let model = train_learner(
                                cfg,
                                learner,
                                features.view(),
                                &labels,
                                derive_seed(seed, "learner", k as u64),
                            )?;
                            report.push(ReportRow {
                                learner: learner.to_string(),
                                metric_name: "inductive_error".into(),
                                value: MetricValue::Num(inductive_error_rate(
                                    model.as_ref(),
                                    test,
                                )?),
                                ..base.clone()
                            });
                        }
                    }
                }
            }
        }
    }
    let timings = run_rq3_timing(cfg)?;
    Ok((report, timings))
}

/// Wall-clock selection-time comparison on a fresh synthetic instance.
/// These rows are measurements, not deterministic outputs.
pub fn run_rq3_timing(cfg: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let mut timings = ExperimentReport::new(cfg.canonical_json());
    let settings = cfg.rq3_timing;
    if settings.runs == 0 {
        return Ok(timings);
    }
    let spec = SyntheticSpec {
        generator: gssl::dataset::Generator::GaussianBlobs,
        n_per_class: settings.n_per_class,
        dimension: 2,
        separation: 4.0,
        noise: 1.0,
        seed: 0,
    };
    for run in 0..settings.runs {
        let seed = derive_seed(cfg.base_seed, "rq3-timing", run as u64);
        let pool = generate_synthetic(&SyntheticSpec {
            seed: derive_seed(seed, "data", 0),
            ..spec
        })?;
        let split = split_labelled(
            &pool,
            &SplitSpec {
                labelled_fraction: settings.labelled_fraction,
                seed: derive_seed(seed, "split", 0),
            },
        )?;
        let k = settings.budget_k.min(split.l());
        let budget = k as f64 / split.l() as f64;
        let plans = [
            mir_attack_from_features(&split, &cfg.kernel, k)?,
            random_attack(&split, k, derive_seed(seed, "random-attack", 0))?,
            greedy_oracle_attack(&split, &cfg.kernel, k)?,
        ];
        for plan in plans {
            timings.push(ReportRow {
                rq: "rq3_timing".into(),
                dataset: "gaussian_blobs".into(),
                seed,
                labelled_fraction: settings.labelled_fraction,
                ssl_algo: String::new(),
                learner: String::new(),
                attack_method: plan.method.to_string(),
                budget: Some(budget),
                arm: String::new(),
                metric_name: "selection_time_s".into(),
                value: MetricValue::Num(plan.selection_time_s),
                duration_s: Some(plan.selection_time_s),
            });
        }
    }
    Ok(timings)
}

const ARM_CLEAN: &str = "clean";
const ARM_NONE: &str = "none";
const ARM_RELABEL: &str = "relabel_mir";
const ARM_ADDITIONAL: &str = "label_additional";

/// Countermeasure study: attack at the configured budget, then defend with
/// an audit budget of one third of the poisoned labels.
pub fn run_rq4(cfg: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg.canonical_json());
    let pool = training_pool(cfg)?;
    let test = test_pool(cfg)?;
    let dataset_name = cfg.dataset.name();
    for (fi, &fraction) in cfg.labelled_fractions.iter().enumerate() {
        for rep in 0..cfg.repetitions {
            let seed = trial_seed(cfg.base_seed, "rq4", fi, rep);
            let split = split_labelled(
                &pool,
                &SplitSpec {
                    labelled_fraction: fraction,
                    seed: derive_seed(seed, "split", 0),
                },
            )?;
            let need_s = cfg.algorithms.contains(&SslAlgorithm::Spreading);
            let graph = build_graph(cfg, &split, need_s)?;
            let k = budget_to_k(cfg.rq4_budget, split.l());
            let m = (k as f64 / 3.0).round() as usize;
            let plan = mir_attack(&split, &graph.ranking, k)?;
            let poisoned = apply_plan(&split, &plan)?;
            let repaired = relabel_top_mir(&poisoned, &graph.ranking, m)?;
            let grown = label_additional(&poisoned, m, derive_seed(seed, "lab-arm", 0))?;

            for &algo in &cfg.algorithms {
                // Arms sharing the original split reuse the prebuilt graph;
                // the additional-labelling arm changes the labelled block,
                // so its graph is rebuilt from scratch.
                let arms: Vec<(&str, &Dataset, InferenceResult)> = vec![
                    (
                        ARM_CLEAN,
                        &split,
                        infer_prebuilt(cfg, &graph, algo, split.observed_labels())?,
                    ),
                    (
                        ARM_NONE,
                        &poisoned,
                        infer_prebuilt(cfg, &graph, algo, poisoned.observed_labels())?,
                    ),
                    (
                        ARM_RELABEL,
                        &repaired,
                        infer_prebuilt(cfg, &graph, algo, repaired.observed_labels())?,
                    ),
                    (ARM_ADDITIONAL, &grown, infer(&grown, &cfg.kernel, algo, &cfg.ssl)?),
                ];
                for (arm, data, inference) in arms {
                    let mut base = row_template("rq4", &dataset_name, seed, fraction);
                    base.ssl_algo = algo.to_string();
                    base.attack_method = AttackMethod::Mir.to_string();
                    base.budget = Some(cfg.rq4_budget);
                    base.arm = arm.to_string();
                    report.push(ReportRow {
                        metric_name: "transductive_error".into(),
                        value: MetricValue::Num(transductive_error_rate(&inference, data)?),
                        ..base.clone()
                    });
                    if let Some(test) = &test {
                        let (features, labels) = induction_training_set(data, &inference)?;
                        for &learner in &cfg.learners {
                            let model = train_learner(
                                cfg,
                                learner,
                                features.view(),
                                &labels,
                                derive_seed(seed, "learner-arm", k as u64),
                            )?;
                            report.push(ReportRow {
                                learner: learner.to_string(),
                                metric_name: "inductive_error".into(),
                                value: MetricValue::Num(inductive_error_rate(
                                    model.as_ref(),
                                    test,
                                )?),
                                ..base.clone()
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}
