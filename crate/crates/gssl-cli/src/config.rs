//! Experiment configuration: one JSON document, every field optional with
//! defaults mirroring the study grids. CLI flags override individual fields;
//! the effective configuration is echoed into every report for provenance.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use gssl::dataset::{DatasetFormat, Generator, SyntheticSpec};
use gssl::inductive::{ForestConfig, LearnerKind, MlpConfig};
use gssl::kernel::KernelConfig;
use gssl::pipeline::SslAlgorithm;
use gssl::ssl::PropagationConfig;

/// Where the training inputs come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    /// Synthetic generation. The spec's `seed` field is ignored here: the
    /// harness derives all generation seeds from `base_seed`.
    Synthetic(SyntheticSpec),
    File {
        path: PathBuf,
        format: DatasetFormat,
        /// Held-out test file for the induction stage, same format.
        #[serde(default)]
        test_path: Option<PathBuf>,
    },
}

impl DatasetSource {
    /// Short dataset name used in report rows.
    pub fn name(&self) -> String {
        match self {
            DatasetSource::Synthetic(spec) => match spec.generator {
                Generator::GaussianBlobs => "gaussian_blobs".to_string(),
                Generator::TwoMoons => "two_moons".to_string(),
            },
            DatasetSource::File { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".to_string()),
        }
    }
}

/// Sizing for the selection-time comparison, which always runs on a fresh
/// synthetic two-blob instance regardless of the configured dataset.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingSettings {
    pub n_per_class: usize,
    pub labelled_fraction: f64,
    pub budget_k: usize,
    pub runs: usize,
}

impl Default for TimingSettings {
    fn default() -> TimingSettings {
        TimingSettings {
            n_per_class: 500,
            labelled_fraction: 0.25,
            budget_k: 20,
            runs: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    /// Per-class size of the synthetic held-out test set (induction stage).
    pub test_per_class: usize,
    pub kernel: KernelConfig,
    pub ssl: PropagationConfig,
    pub algorithms: Vec<SslAlgorithm>,
    pub learners: Vec<LearnerKind>,
    pub labelled_fractions: Vec<f64>,
    /// Poison budgets as fractions of the labelled count.
    pub poison_budgets: Vec<f64>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub mlp: MlpConfig,
    pub forest: ForestConfig,
    pub rq3_timing: TimingSettings,
    /// Poison budget (fraction of l) used by the countermeasure study.
    pub rq4_budget: f64,
}

impl Default for ExperimentConfig {
    fn default() -> ExperimentConfig {
        ExperimentConfig {
            dataset: DatasetSource::Synthetic(SyntheticSpec {
                generator: Generator::GaussianBlobs,
                n_per_class: 200,
                dimension: 2,
                separation: 4.0,
                noise: 1.0,
                seed: 0,
            }),
            test_per_class: 100,
            kernel: KernelConfig::default(),
            ssl: PropagationConfig::default(),
            algorithms: vec![SslAlgorithm::Propagation, SslAlgorithm::Spreading],
            learners: vec![LearnerKind::Mlp, LearnerKind::Forest],
            labelled_fractions: vec![0.05, 0.15, 0.25],
            poison_budgets: vec![0.05, 0.10, 0.15, 0.20],
            repetitions: 5,
            base_seed: 42,
            mlp: MlpConfig::default(),
            forest: ForestConfig::default(),
            rq3_timing: TimingSettings::default(),
            rq4_budget: 0.10,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<ExperimentConfig> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(cfg)
    }

    /// Canonical single-line JSON of the effective configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
