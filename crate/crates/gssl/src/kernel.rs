//! RBF similarity graph and transition matrices.
//!
//! The similarity between two inputs is `w_ij = exp(-gamma * ||x_i - x_j||^2)`.
//! From the weight matrix two normalizations are derived: the row-stochastic
//! transition matrix used by label propagation (labelled rows clamped to
//! identity, unlabelled rows column-normalized then row-normalized), and the
//! symmetric normalization `S = D^(-1/2) W D^(-1/2)` used by label spreading.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// RBF kernel parameters. `gamma = 1 / (2 sigma^2)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelConfig {
    pub gamma: f64,
    /// Drop the self-similarity `w_ii = 1` from the graph. The literal RBF
    /// formula keeps it, so this defaults to off.
    #[serde(default)]
    pub zero_diagonal: bool,
}

impl KernelConfig {
    pub fn new(gamma: f64) -> KernelConfig {
        KernelConfig {
            gamma,
            zero_diagonal: false,
        }
    }

    /// Bandwidth sigma implied by gamma.
    pub fn sigma(&self) -> f64 {
        (2.0 * self.gamma).powf(-0.5)
    }
}

impl Default for KernelConfig {
    /// Defaults to `gamma = 20`, the default of the reference transductive
    /// implementations. Synthetic desk-scale data usually needs another
    /// scale, so gamma is always exposed in configuration.
    fn default() -> KernelConfig {
        KernelConfig::new(20.0)
    }
}

/// Dense symmetric similarity matrix with entries in (0, 1].
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    w: Array2<f64>,
}

impl WeightMatrix {
    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.w.view()
    }
}

/// Row-stochastic transition matrix with the labelled block placed first.
/// Rows `0..l` are identity rows (clamped labels); every row sums to 1.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    t_bar: Array2<f64>,
    l: usize,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.t_bar.nrows()
    }

    /// Number of labelled (clamped) rows.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Number of unlabelled rows.
    pub fn u(&self) -> usize {
        self.n() - self.l
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.t_bar.view()
    }

    /// Unlabelled-to-unlabelled block.
    pub fn uu(&self) -> ArrayView2<'_, f64> {
        self.t_bar.slice(ndarray::s![self.l.., self.l..])
    }

    /// Unlabelled-to-labelled block.
    pub fn ul(&self) -> ArrayView2<'_, f64> {
        self.t_bar.slice(ndarray::s![self.l.., ..self.l])
    }
}

/// Apply the RBF formula to every pair of inputs. The upper triangle is
/// computed and mirrored, so the result is symmetric by construction.
pub fn rbf_weights(features: ArrayView2<'_, f64>, config: &KernelConfig) -> Result<WeightMatrix> {
    let n = features.nrows();
    if n < 2 {
        return Err(Error::invalid("need at least 2 inputs to build a graph"));
    }
    if !(config.gamma.is_finite() && config.gamma > 0.0) {
        return Err(Error::invalid("gamma must be finite and positive"));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite feature value"));
    }
    let mut w = Array2::zeros((n, n));
    let diag = if config.zero_diagonal { 0.0 } else { 1.0 };
    for i in 0..n {
        w[[i, i]] = diag;
        for j in (i + 1)..n {
            let mut d2 = 0.0;
            for k in 0..features.ncols() {
                let diff = features[[i, k]] - features[[j, k]];
                d2 += diff * diff;
            }
            let v = (-config.gamma * d2).exp();
            w[[i, j]] = v;
            w[[j, i]] = v;
        }
    }
    Ok(WeightMatrix { w })
}

/// Build the label transition matrix from similarities.
///
/// Labelled rows (the first `l`) are identity rows. Unlabelled row `i` is
/// `w_ij` divided by the column sum of column `j`, and the whole matrix is
/// then row-normalized.
pub fn build_transition(weights: &WeightMatrix, l: usize) -> Result<TransitionMatrix> {
    let n = weights.n();
    if l < 1 || l >= n {
        return Err(Error::invalid(format!(
            "labelled count l={l} must satisfy 1 <= l < n={n}"
        )));
    }
    let w = &weights.w;
    let col_sums: Array1<f64> = w.sum_axis(ndarray::Axis(0));
    if col_sums.iter().any(|&s| s <= 0.0) {
        return Err(Error::invalid(
            "zero column sum in weight matrix (isolated input)",
        ));
    }
    let mut t_bar = Array2::zeros((n, n));
    for i in 0..l {
        t_bar[[i, i]] = 1.0;
    }
    for i in l..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            let v = w[[i, j]] / col_sums[j];
            t_bar[[i, j]] = v;
            row_sum += v;
        }
        if row_sum <= 0.0 {
            return Err(Error::invalid(format!(
                "zero transition row for input {i} (kernel underflow)"
            )));
        }
        for j in 0..n {
            t_bar[[i, j]] /= row_sum;
        }
    }
    Ok(TransitionMatrix { t_bar, l })
}

/// Symmetrically normalized adjacency `S = D^(-1/2) W D^(-1/2)`, where `D`
/// is the diagonal degree matrix of `W`. Used by label spreading.
pub fn normalized_adjacency(weights: &WeightMatrix) -> Result<Array2<f64>> {
    let n = weights.n();
    if n < 2 {
        return Err(Error::invalid("need at least 2 inputs"));
    }
    let degrees: Array1<f64> = weights.w.sum_axis(ndarray::Axis(1));
    if degrees.iter().any(|&d| d <= 0.0) {
        return Err(Error::invalid("zero degree in weight matrix"));
    }
    let inv_sqrt: Vec<f64> = degrees.iter().map(|&d| 1.0 / d.sqrt()).collect();
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            s[[i, j]] = weights.w[[i, j]] * inv_sqrt[i] * inv_sqrt[j];
        }
    }
    Ok(s)
}
