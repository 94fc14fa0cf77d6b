//! Supervised learners for the induction stage.
//!
//! After transductive inference the full input set — labelled inputs with
//! their observed labels, unlabelled inputs with their inferred labels —
//! becomes the training set of an ordinary supervised model, which is then
//! scored on held-out data.

mod forest;
mod mlp;

pub use forest::{gini_impurity, train_forest, Forest, ForestConfig};
pub use mlp::{train_mlp, Mlp, MlpConfig};

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::ssl::InferenceResult;

/// A trained model: a deterministic mapping from feature vector to class.
pub trait Model {
    fn predict(&self, x: ArrayView1<'_, f64>) -> Label;

    fn predict_batch(&self, xs: ndarray::ArrayView2<'_, f64>) -> Vec<Label> {
        xs.rows().into_iter().map(|r| self.predict(r)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Mlp,
    Forest,
}

impl std::fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LearnerKind::Mlp => write!(f, "mlp"),
            LearnerKind::Forest => write!(f, "forest"),
        }
    }
}

/// Assemble the induction training set from a dataset and the inference that
/// ran on it: features in labelled-first order, labelled inputs keep their
/// observed labels, unlabelled inputs take their inferred labels.
pub fn induction_training_set(
    data: &Dataset,
    inference: &InferenceResult,
) -> Result<(Array2<f64>, Vec<Label>)> {
    if inference.scores.len() != data.n() {
        return Err(Error::invalid("inference does not match dataset"));
    }
    let features = data.ssl_ordered_features();
    let mut labels = Vec::with_capacity(data.n());
    labels.extend_from_slice(data.observed_labels());
    labels.extend_from_slice(&inference.predicted[data.l()..]);
    Ok((features, labels))
}

/// Misclassification fraction of a trained model on a held-out test set.
pub fn inductive_error_rate(model: &dyn Model, test: &Dataset) -> Result<f64> {
    if test.n() == 0 {
        return Err(Error::invalid("empty test set"));
    }
    let wrong = test
        .features()
        .rows()
        .into_iter()
        .zip(test.truth_labels())
        .filter(|(x, &truth)| model.predict(x.view()) != truth)
        .count();
    Ok(wrong as f64 / test.n() as f64)
}

pub(crate) fn check_training_inputs(n: usize, labels: &[Label]) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("need at least 2 training samples"));
    }
    if labels.len() != n {
        return Err(Error::invalid("label count does not match samples"));
    }
    let pos = labels.iter().any(|&c| c == Label::Pos);
    let neg = labels.iter().any(|&c| c == Label::Neg);
    if !(pos && neg) {
        return Err(Error::invalid("training set must contain both classes"));
    }
    Ok(())
}
