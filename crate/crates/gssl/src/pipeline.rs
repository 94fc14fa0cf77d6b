//! Dataset-to-inference glue shared by the attacks, defenses and the
//! experiment harness.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::kernel::{build_transition, normalized_adjacency, rbf_weights, KernelConfig};
use crate::ssl::{
    label_propagation_iterative, label_spreading, transductive_error_rate, InferenceResult,
    PropagationConfig,
};

/// Which transductive solver to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SslAlgorithm {
    Propagation,
    Spreading,
}

impl std::fmt::Display for SslAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SslAlgorithm::Propagation => write!(f, "propagation"),
            SslAlgorithm::Spreading => write!(f, "spreading"),
        }
    }
}

/// Build the graph for `data` (in labelled-first order) and run the chosen
/// solver on its observed labels.
pub fn infer(
    data: &Dataset,
    kernel: &KernelConfig,
    algorithm: SslAlgorithm,
    config: &PropagationConfig,
) -> Result<InferenceResult> {
    let feats = data.ssl_ordered_features();
    let weights = rbf_weights(feats.view(), kernel)?;
    match algorithm {
        SslAlgorithm::Propagation => {
            let t_bar = build_transition(&weights, data.l())?;
            label_propagation_iterative(&t_bar, data.observed_labels(), config)
        }
        SslAlgorithm::Spreading => {
            let s = normalized_adjacency(&weights)?;
            label_spreading(&s, data.observed_labels(), config)
        }
    }
}

/// Convenience composition: infer and score against the ground truth of the
/// unlabelled inputs.
pub fn transductive_error(
    data: &Dataset,
    kernel: &KernelConfig,
    algorithm: SslAlgorithm,
    config: &PropagationConfig,
) -> Result<f64> {
    let result = infer(data, kernel, algorithm, config)?;
    transductive_error_rate(&result, data)
}
