//! Rank and linear correlation, plus summary aggregation over repeated runs.
//!
//! Kendall's coefficient is computed in its tie-corrected tau-b form: MIR
//! vectors are integer-valued with many zeros, so ties are the norm rather
//! than the exception. Constant inputs make either coefficient undefined;
//! that is reported as an explicit [`Correlation::Degenerate`], never as a
//! silent NaN.

use crate::error::{Error, Result};

/// Outcome of a correlation computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation {
    Coefficient(f64),
    /// At least one input was constant; the coefficient is undefined.
    Degenerate,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Coefficient(v) => Some(v),
            Correlation::Degenerate => None,
        }
    }
}

impl std::fmt::Display for Correlation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Correlation::Coefficient(v) => write!(f, "{v}"),
            Correlation::Degenerate => write!(f, "degenerate"),
        }
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::invalid("need at least 2 observations"));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite observation"));
    }
    Ok(())
}

fn tie_pair_count(sorted: &[f64]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Merge sort on the y-values counting the swaps needed, which equals the
/// number of discordant pairs once the data is pre-sorted by (x, y).
fn merge_count_swaps(values: &mut Vec<f64>) -> u64 {
    let n = values.len();
    let mut buffer = vec![0.0; n];
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || values[i] <= values[j]) {
                    buffer[k] = values[i];
                    i += 1;
                } else {
                    swaps += (mid - i) as u64;
                    buffer[k] = values[j];
                    j += 1;
                }
                k += 1;
            }
            start = end;
        }
        std::mem::swap(values, &mut buffer);
        width *= 2;
    }
    swaps
}

/// Tie-corrected Kendall rank correlation (tau-b).
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<Correlation> {
    check_lengths(a, b)?;
    let n = a.len() as u64;
    let n0 = n * (n - 1) / 2;

    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));

    // Pairs tied in x, and tied in both, from runs in the (x, y) order.
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let x_ties = tie_pair_count(&xs);
    let mut both_ties = 0u64;
    let mut run = 1u64;
    for w in pairs.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            both_ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    both_ties += run * (run - 1) / 2;

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let discordant = merge_count_swaps(&mut ys);
    let y_ties = tie_pair_count(&ys);

    if x_ties == n0 || y_ties == n0 {
        return Ok(Correlation::Degenerate);
    }
    let con_minus_dis =
        n0 as f64 - x_ties as f64 - y_ties as f64 + both_ties as f64 - 2.0 * discordant as f64;
    let denominator = ((n0 - x_ties) as f64 * (n0 - y_ties) as f64).sqrt();
    let tau = (con_minus_dis / denominator).clamp(-1.0, 1.0);
    Ok(Correlation::Coefficient(tau))
}

/// Pearson's linear correlation coefficient.
pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<Correlation> {
    check_lengths(a, b)?;
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    if constant(a) || constant(b) {
        return Ok(Correlation::Degenerate);
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Ok(Correlation::Degenerate);
    }
    Ok(Correlation::Coefficient(
        (cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0),
    ))
}

/// Summary statistics over repeated runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean, median, population standard deviation and range of a value list.
pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::invalid("cannot summarize an empty list"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    Ok(Summary {
        count: values.len(),
        mean,
        median,
        std: var.sqrt(),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
    })
}

/// Median helper for places that only need the midpoint.
pub fn median(values: &[f64]) -> Result<f64> {
    Ok(summarize(values)?.median)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeff(c: Correlation) -> f64 {
        c.value().expect("expected a defined coefficient")
    }

    #[test]
    fn perfect_concordance_and_discordance() {
        assert_eq!(coeff(kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap()), 1.0);
        assert_eq!(coeff(kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap()), -1.0);
    }

    #[test]
    fn single_discordant_pair() {
        // 5 concordant pairs, 1 discordant, no ties: (5 - 1) / 6.
        let tau = coeff(kendall_tau(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap());
        assert!((tau - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tie_corrected_values_match_reference() {
        let tau = coeff(
            kendall_tau(&[1.0, 1.0, 2.0, 3.0, 4.0, 4.0], &[1.0, 2.0, 2.0, 3.0, 3.0, 4.0]).unwrap(),
        );
        assert!((tau - 0.8461538461538463).abs() < 1e-12);

        let tau = coeff(
            kendall_tau(
                &[0.0, 0.0, 0.0, 1.0, 2.0, 2.0, 3.0],
                &[5.0, 3.0, 4.0, 4.0, 2.0, 2.0, 1.0],
            )
            .unwrap(),
        );
        assert!((tau - -0.7789808377045201).abs() < 1e-12);
    }

    #[test]
    fn constant_inputs_are_degenerate_not_nan() {
        assert_eq!(
            kendall_tau(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(),
            Correlation::Degenerate
        );
        assert_eq!(
            pearson_r(&[1.0, 2.0, 3.0], &[7.0, 7.0, 7.0]).unwrap(),
            Correlation::Degenerate
        );
    }

    #[test]
    fn affine_relations_saturate_pearson() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b: Vec<f64> = a.iter().map(|x| 2.0 * x + 3.0).collect();
        assert_eq!(coeff(pearson_r(&a, &b).unwrap()), 1.0);
        let c: Vec<f64> = a.iter().map(|x| -x).collect();
        assert_eq!(coeff(pearson_r(&a, &c).unwrap()), -1.0);
    }

    #[test]
    fn pearson_matches_direct_formula_evaluation() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 1.0, 4.0, 3.0, 6.0];
        let r = coeff(pearson_r(&a, &b).unwrap());
        assert!((r - 0.8219949365267865).abs() < 1e-12);
    }

    #[test]
    fn correlations_are_symmetric_in_argument_order() {
        let a = [0.5, 2.0, 2.0, -1.0, 3.5, 0.0];
        let b = [1.0, 0.0, 2.0, 2.0, -0.5, 1.5];
        assert_eq!(kendall_tau(&a, &b).unwrap(), kendall_tau(&b, &a).unwrap());
        assert_eq!(pearson_r(&a, &b).unwrap(), pearson_r(&b, &a).unwrap());
    }

    #[test]
    fn tau_is_invariant_under_monotone_transforms() {
        let a = [0.3, 1.2, 2.0, 2.0, 5.5];
        let b = [4.0, 1.0, 3.0, 2.5, 6.0];
        let before = kendall_tau(&a, &b).unwrap();
        let a2: Vec<f64> = a.iter().map(|x| x.exp()).collect();
        let after = kendall_tau(&a2, &b).unwrap();
        match (before, after) {
            (Correlation::Coefficient(x), Correlation::Coefficient(y)) => {
                assert!((x - y).abs() < 1e-15)
            }
            _ => panic!("unexpected degenerate result"),
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(kendall_tau(&[1.0, 2.0], &[1.0]).is_err());
        assert!(pearson_r(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn summary_of_single_run() {
        let s = summarize(&[4.2]).unwrap();
        assert_eq!(s.mean, 4.2);
        assert_eq!(s.median, 4.2);
        assert_eq!(s.std, 0.0);
    }

    #[test]
    fn summary_reference_values() {
        let s = summarize(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.median, 2.0);
        assert!((s.std - 0.816496580927726).abs() < 1e-15);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 3.0);
    }

    #[test]
    fn summary_rejects_empty_input() {
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn even_length_median_averages_midpoints() {
        let s = summarize(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median, 2.5);
    }
}
