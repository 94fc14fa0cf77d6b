//! Transductive label inference: label propagation and label spreading.
//!
//! Label propagation iterates `Y <- T_bar * Y`, re-clamping the labelled
//! entries after each step, until the scores stop moving; its fixed point is
//! the closed form `y_U = (I - T_uu)^(-1) T_ul y_L`. Label spreading iterates
//! `F <- alpha * S * F + (1 - alpha) * Y0` over the symmetrically normalized
//! adjacency and never hard-clamps the labelled entries.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::kernel::{TransitionMatrix, WeightMatrix};
use crate::linalg::LuFactors;

/// Iteration controls shared by both solvers. Defaults follow the reference
/// transductive implementations: convergence threshold 1e-3, at most 30
/// iterations, clamping factor 0.1 (label spreading only).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub clamping_alpha: f64,
}

impl Default for PropagationConfig {
    fn default() -> PropagationConfig {
        PropagationConfig {
            tolerance: 1e-3,
            max_iterations: 30,
            clamping_alpha: 0.1,
        }
    }
}

impl PropagationConfig {
    /// Settings tight enough to reach the fixed point; used when the
    /// iterative solver is cross-validated against the closed form.
    pub fn tight() -> PropagationConfig {
        PropagationConfig {
            tolerance: 1e-10,
            max_iterations: 10_000,
            clamping_alpha: 0.1,
        }
    }
}

/// Scores and sign predictions for every input, in labelled-first order
/// (the ordering of the [`TransitionMatrix`] the inference ran on).
#[derive(Debug, Clone)]
pub struct InferenceResult {
    pub scores: Array1<f64>,
    pub predicted: Vec<Label>,
    pub iterations_used: usize,
    pub converged: bool,
    /// Scores within 1e-12 of zero; their predictions defaulted to `Pos`.
    pub tie_count: usize,
}

impl InferenceResult {
    fn from_scores(scores: Array1<f64>, iterations_used: usize, converged: bool) -> Self {
        let mut tie_count = 0;
        let predicted = scores
            .iter()
            .map(|&s| {
                if s.abs() < 1e-12 {
                    tie_count += 1;
                }
                Label::from_score(s)
            })
            .collect();
        InferenceResult {
            scores,
            predicted,
            iterations_used,
            converged,
            tie_count,
        }
    }
}

fn check_labels(n: usize, y_l: &[Label]) -> Result<()> {
    if y_l.is_empty() || y_l.len() >= n {
        return Err(Error::invalid(format!(
            "labelled count {} must satisfy 1 <= l < n={n}",
            y_l.len()
        )));
    }
    Ok(())
}

/// Iterative label propagation with hard clamping.
pub fn label_propagation_iterative(
    t_bar: &TransitionMatrix,
    y_l: &[Label],
    config: &PropagationConfig,
) -> Result<InferenceResult> {
    let n = t_bar.n();
    check_labels(n, y_l)?;
    if y_l.len() != t_bar.l() {
        return Err(Error::invalid("label vector does not match transition matrix"));
    }
    let l = t_bar.l();
    let mut y = Array1::zeros(n);
    for (i, lab) in y_l.iter().enumerate() {
        y[i] = lab.value();
    }
    let mut iterations = 0;
    let mut converged = false;
    let t = t_bar.matrix();
    while iterations < config.max_iterations {
        let mut next = t.dot(&y);
        for (i, lab) in y_l.iter().enumerate().take(l) {
            next[i] = lab.value();
        }
        iterations += 1;
        let change = next
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        y = next;
        if change < config.tolerance {
            converged = true;
            break;
        }
    }
    Ok(InferenceResult::from_scores(y, iterations, converged))
}

/// Exact fixed point of label propagation: solve
/// `(I - T_uu) y_U = T_ul y_L` with a pivoted dense factorization.
pub fn label_propagation_closed_form(
    t_bar: &TransitionMatrix,
    y_l: &[Label],
) -> Result<InferenceResult> {
    let factors = propagation_factors(t_bar)?;
    Ok(closed_form_with_factors(&factors, t_bar, y_l))
}

/// Factorize `I - T_uu` once so repeated solves against different label
/// vectors (the graph does not depend on labels) reuse the factorization.
pub fn propagation_factors(t_bar: &TransitionMatrix) -> Result<LuFactors> {
    let u = t_bar.u();
    let t_uu = t_bar.uu();
    let mut system = Array2::zeros((u, u));
    for i in 0..u {
        for j in 0..u {
            system[[i, j]] = -t_uu[[i, j]];
        }
        system[[i, i]] += 1.0;
    }
    LuFactors::factorize(system)
}

/// Closed-form solve reusing precomputed factors. Follows the exact same
/// arithmetic as [`label_propagation_closed_form`].
pub fn closed_form_with_factors(
    factors: &LuFactors,
    t_bar: &TransitionMatrix,
    y_l: &[Label],
) -> InferenceResult {
    let l = t_bar.l();
    let n = t_bar.n();
    let y_vec: Array1<f64> = y_l.iter().map(|lab| lab.value()).collect();
    let rhs = t_bar.ul().dot(&y_vec);
    let y_u = factors.solve(rhs.view());
    let mut scores = Array1::zeros(n);
    for i in 0..l {
        scores[i] = y_vec[i];
    }
    for i in l..n {
        scores[i] = y_u[i - l];
    }
    InferenceResult::from_scores(scores, 0, true)
}

/// Harmonic-function variant of the closed form,
/// `y_U = (D_uu - W_uu)^(-1) W_ul y_L`, computed directly from the weight
/// matrix. Kept as an alternative route for decision-level comparisons with
/// [`label_propagation_closed_form`]; the two are not asserted to agree on
/// raw scores.
pub fn label_propagation_harmonic(
    weights: &WeightMatrix,
    l: usize,
    y_l: &[Label],
) -> Result<InferenceResult> {
    let n = weights.n();
    check_labels(n, y_l)?;
    if y_l.len() != l {
        return Err(Error::invalid("label vector does not match l"));
    }
    let u = n - l;
    let w = weights.matrix();
    let mut system = Array2::zeros((u, u));
    for i in 0..u {
        let mut degree = 0.0;
        for k in 0..n {
            degree += w[[l + i, k]];
        }
        for j in 0..u {
            system[[i, j]] = -w[[l + i, l + j]];
        }
        system[[i, i]] += degree;
    }
    let mut rhs = Array1::zeros(u);
    for i in 0..u {
        for (j, lab) in y_l.iter().enumerate() {
            rhs[i] += w[[l + i, j]] * lab.value();
        }
    }
    let y_u = LuFactors::factorize(system)?.solve(rhs.view());
    let mut scores = Array1::zeros(n);
    for (i, lab) in y_l.iter().enumerate() {
        scores[i] = lab.value();
    }
    for i in 0..u {
        scores[l + i] = y_u[i];
    }
    Ok(InferenceResult::from_scores(scores, 0, true))
}

/// Label spreading over the symmetrically normalized adjacency `s`.
/// Labelled entries are only softly clamped through `clamping_alpha`.
pub fn label_spreading(
    s: &Array2<f64>,
    y_l: &[Label],
    config: &PropagationConfig,
) -> Result<InferenceResult> {
    let n = s.nrows();
    check_labels(n, y_l)?;
    let alpha = config.clamping_alpha;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("clamping_alpha must lie in [0, 1]"));
    }
    let mut y0 = Array1::zeros(n);
    for (i, lab) in y_l.iter().enumerate() {
        y0[i] = lab.value();
    }
    let mut f = y0.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iterations {
        let next = alpha * s.dot(&f) + (1.0 - alpha) * &y0;
        iterations += 1;
        let change = next
            .iter()
            .zip(f.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        f = next;
        if change < config.tolerance {
            converged = true;
            break;
        }
    }
    Ok(InferenceResult::from_scores(f, iterations, converged))
}

/// Fraction of unlabelled inputs whose predicted label differs from the
/// ground truth. `result` must come from an inference over `data`'s
/// labelled-first ordering.
pub fn transductive_error_rate(result: &InferenceResult, data: &Dataset) -> Result<f64> {
    if result.scores.len() != data.n() {
        return Err(Error::invalid("result and dataset shapes disagree"));
    }
    let u = data.u();
    if u == 0 {
        return Err(Error::NoUnlabelledInputs);
    }
    let l = data.l();
    let wrong = data
        .unlabelled_idx()
        .iter()
        .enumerate()
        .filter(|(j, &i)| result.predicted[l + j] != data.truth_labels()[i])
        .count();
    Ok(wrong as f64 / u as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_transition, normalized_adjacency, rbf_weights, KernelConfig};
    use ndarray::array;

    fn three_point() -> (WeightMatrix, TransitionMatrix) {
        let feats = array![[0.0], [1.0], [2.0]];
        let w = rbf_weights(feats.view(), &KernelConfig::new(0.25)).unwrap();
        let t = build_transition(&w, 1).unwrap();
        (w, t)
    }

    #[test]
    fn single_positive_source_propagates_positive() {
        let (_, t) = three_point();
        let r =
            label_propagation_iterative(&t, &[Label::Pos], &PropagationConfig::tight()).unwrap();
        assert_eq!(r.predicted, vec![Label::Pos; 3]);
        assert!(r.converged);
    }

    #[test]
    fn single_negative_source_propagates_negative() {
        let (_, t) = three_point();
        let r =
            label_propagation_iterative(&t, &[Label::Neg], &PropagationConfig::tight()).unwrap();
        assert_eq!(r.predicted, vec![Label::Neg; 3]);
    }

    #[test]
    fn closed_form_scores_are_positive_for_positive_source() {
        let (_, t) = three_point();
        let r = label_propagation_closed_form(&t, &[Label::Pos]).unwrap();
        assert!(r.scores[1] > 0.0 && r.scores[2] > 0.0);
        // Single boundary value: the harmonic fixed point is the constant 1.
        assert!((r.scores[1] - 1.0).abs() < 1e-12);
        assert!((r.scores[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_unlabelled_point_reduces_to_scalar_formula() {
        let feats = array![[0.0], [0.7], [1.9]];
        let w = rbf_weights(feats.view(), &KernelConfig::new(0.8)).unwrap();
        let t = build_transition(&w, 2).unwrap();
        let y = [Label::Pos, Label::Neg];
        let r = label_propagation_closed_form(&t, &y).unwrap();
        let m = t.matrix();
        let expected = (m[[2, 0]] * 1.0 + m[[2, 1]] * -1.0) / (1.0 - m[[2, 2]]);
        assert!((r.scores[2] - expected).abs() < 1e-12);
    }

    #[test]
    fn spreading_with_zero_alpha_leaves_unlabelled_tied() {
        let (w, _) = three_point();
        let s = normalized_adjacency(&w).unwrap();
        let cfg = PropagationConfig {
            clamping_alpha: 0.0,
            ..PropagationConfig::default()
        };
        let r = label_spreading(&s, &[Label::Pos], &cfg).unwrap();
        assert_eq!(r.scores[1], 0.0);
        assert_eq!(r.scores[2], 0.0);
        // Tie rule: zero scores predict Pos and are counted.
        assert_eq!(r.predicted[1], Label::Pos);
        assert_eq!(r.tie_count, 2);
    }

    #[test]
    fn spreading_single_class_source_predicts_that_class() {
        let (w, _) = three_point();
        let s = normalized_adjacency(&w).unwrap();
        let r = label_spreading(&s, &[Label::Pos], &PropagationConfig::default()).unwrap();
        assert_eq!(r.predicted, vec![Label::Pos; 3]);
    }

    #[test]
    fn error_rate_edge_values() {
        use crate::dataset::{generate_synthetic, split_labelled, Generator, SplitSpec, SyntheticSpec};
        let data = generate_synthetic(&SyntheticSpec {
            generator: Generator::GaussianBlobs,
            n_per_class: 4,
            dimension: 1,
            separation: 4.0,
            noise: 0.3,
            seed: 2,
        })
        .unwrap();
        let split = split_labelled(
            &data,
            &SplitSpec {
                labelled_fraction: 0.5,
                seed: 1,
            },
        )
        .unwrap();
        let l = split.l();
        let truth_u = split.unlabelled_truth();

        // All correct.
        let mut scores = Array1::zeros(split.n());
        for (j, lab) in truth_u.iter().enumerate() {
            scores[l + j] = lab.value();
        }
        let r = InferenceResult::from_scores(scores.clone(), 0, true);
        assert_eq!(transductive_error_rate(&r, &split).unwrap(), 0.0);

        // All wrong.
        let r = InferenceResult::from_scores(scores.mapv(|v| -v), 0, true);
        assert_eq!(transductive_error_rate(&r, &split).unwrap(), 1.0);

        // Exactly one of four wrong.
        let mut scores = Array1::zeros(split.n());
        for (j, lab) in truth_u.iter().enumerate() {
            scores[l + j] = lab.value();
        }
        scores[l] = -scores[l];
        let r = InferenceResult::from_scores(scores, 0, true);
        assert_eq!(transductive_error_rate(&r, &split).unwrap(), 0.25);
    }

    #[test]
    fn unconverged_run_reports_it() {
        let (_, t) = three_point();
        let cfg = PropagationConfig {
            tolerance: 1e-300,
            max_iterations: 1,
            clamping_alpha: 0.1,
        };
        let r = label_propagation_iterative(&t, &[Label::Pos], &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_used, 1);
    }

    #[test]
    fn label_vector_must_match_matrix() {
        let (_, t) = three_point();
        assert!(
            label_propagation_iterative(&t, &[Label::Pos, Label::Neg], &PropagationConfig::tight())
                .is_err()
        );
    }
}
