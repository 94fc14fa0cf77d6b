//! Direct influence of labelled inputs on unlabelled inputs, and the
//! major-influence-range (MIR) ranking built on it.
//!
//! The influence of labelled input `j` on unlabelled input `i` is the
//! transition entry `e_ij = T_bar[i, j]` — one-hop only, indirect multi-hop
//! propagation is deliberately ignored. A labelled input is a *major
//! influencer* of `i` when it holds strictly more than half of the total
//! labelled influence on `i`; its MIR is the number of unlabelled inputs it
//! majorly influences.

use ndarray::Array2;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::TransitionMatrix;

/// The `u x l` direct-influence matrix. Rows follow the unlabelled inputs in
/// transition order, columns the labelled inputs.
#[derive(Debug, Clone)]
pub struct InfluenceTable {
    e: Array2<f64>,
}

impl InfluenceTable {
    /// Build a table from raw entries (used for hand-constructed cases).
    /// Entries must be finite, non-negative, and rows must not sum above 1
    /// (they are a subset of a stochastic row).
    pub fn from_matrix(e: Array2<f64>) -> Result<InfluenceTable> {
        if e.nrows() == 0 || e.ncols() == 0 {
            return Err(Error::invalid("influence table must be non-empty"));
        }
        if e.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::invalid("influence entries must be finite and >= 0"));
        }
        for row in e.rows() {
            if row.sum() > 1.0 + 1e-9 {
                return Err(Error::invalid("influence row sums must not exceed 1"));
            }
        }
        Ok(InfluenceTable { e })
    }

    /// Unlabelled rows.
    pub fn u(&self) -> usize {
        self.e.nrows()
    }

    /// Labelled columns.
    pub fn l(&self) -> usize {
        self.e.ncols()
    }

    pub fn matrix(&self) -> ndarray::ArrayView2<'_, f64> {
        self.e.view()
    }

    /// Rows whose labelled influence is entirely zero. Can only occur when
    /// the kernel underflows pathologically; such rows have no major
    /// influencer.
    pub fn zero_rows(&self) -> Vec<usize> {
        self.e
            .rows()
            .into_iter()
            .enumerate()
            .filter(|(_, row)| row.sum() == 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Extract the direct-influence table from a transition matrix. This is a
/// pure submatrix view: `e_ij = T_bar[l + i, j]`.
pub fn direct_influence(t_bar: &TransitionMatrix) -> Result<InfluenceTable> {
    if t_bar.l() == 0 || t_bar.u() == 0 {
        return Err(Error::invalid(
            "influence needs at least one labelled and one unlabelled input",
        ));
    }
    Ok(InfluenceTable {
        e: t_bar.ul().to_owned(),
    })
}

/// The labelled input with the highest direct influence on unlabelled row
/// `i`. Ties break to the lowest column index.
pub fn most_influential(e: &InfluenceTable, i: usize) -> Result<usize> {
    if i >= e.u() {
        return Err(Error::invalid(format!("row {i} out of range")));
    }
    let row = e.e.row(i);
    let mut best = 0;
    for (j, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = j;
        }
    }
    Ok(best)
}

/// Whether unlabelled row `i` has a major influencer: the most influential
/// labelled input holds strictly more than half of the row's total labelled
/// influence. All-zero rows have none.
pub fn is_major_influencer(e: &InfluenceTable, i: usize) -> Result<bool> {
    let best = most_influential(e, i)?;
    let row = e.e.row(i);
    let total: f64 = row.sum();
    if total == 0.0 {
        return Ok(false);
    }
    Ok(row[best] / total > 0.5)
}

/// MIR counts per labelled input plus the descending ranking derived from
/// them. Ranking ties break to the lower labelled index, which keeps attacks
/// built on the ranking reproducible.
#[derive(Debug, Clone)]
pub struct MirVector {
    pub mir: Vec<usize>,
    pub ranking: Vec<usize>,
}

impl MirVector {
    /// CSV export: `labelled_index,dataset_index,mir,rank` (header included),
    /// one row per labelled input in labelled order.
    pub fn to_csv(&self, data: &Dataset) -> String {
        let mut rank_of = vec![0usize; self.mir.len()];
        for (rank, &j) in self.ranking.iter().enumerate() {
            rank_of[j] = rank;
        }
        let mut out = String::from("labelled_index,dataset_index,mir,rank\n");
        for (j, &count) in self.mir.iter().enumerate() {
            let dataset_index = data.labelled_idx().get(j).copied().unwrap_or(j);
            out.push_str(&format!("{j},{dataset_index},{count},{}\n", rank_of[j]));
        }
        out
    }
}

/// Count, for every labelled input, the unlabelled inputs it majorly
/// influences. Only the per-row argmax can exceed the 0.5 share, so each row
/// contributes to at most one count and the counts sum to at most `u`.
pub fn mir(e: &InfluenceTable) -> Result<MirVector> {
    let l = e.l();
    let mut counts = vec![0usize; l];
    for i in 0..e.u() {
        let best = most_influential(e, i)?;
        let row = e.e.row(i);
        let total: f64 = row.sum();
        if total > 0.0 && row[best] / total > 0.5 {
            counts[best] += 1;
        }
    }
    let mut ranking: Vec<usize> = (0..l).collect();
    ranking.sort_by_key(|&j| (std::cmp::Reverse(counts[j]), j));
    Ok(MirVector {
        mir: counts,
        ranking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_transition, rbf_weights, KernelConfig};
    use ndarray::array;

    fn three_point_transition() -> TransitionMatrix {
        let feats = array![[0.0], [1.0], [2.0]];
        let w = rbf_weights(feats.view(), &KernelConfig::new(0.25)).unwrap();
        build_transition(&w, 1).unwrap()
    }

    #[test]
    fn three_point_influence_matches_transition_oracle() {
        // Values read off the hand-computed transition matrix.
        let t = three_point_transition();
        let e = direct_influence(&t).unwrap();
        assert_eq!(e.u(), 2);
        assert_eq!(e.l(), 1);
        assert!((e.matrix()[[0, 0]] - 0.324915285034).abs() < 1e-9);
        assert!((e.matrix()[[1, 0]] - 0.181978637693).abs() < 1e-9);
    }

    #[test]
    fn single_unlabelled_row_is_a_plain_extraction() {
        let feats = array![[0.0], [0.5], [1.5]];
        let w = rbf_weights(feats.view(), &KernelConfig::new(1.0)).unwrap();
        let t = build_transition(&w, 2).unwrap();
        let e = direct_influence(&t).unwrap();
        assert_eq!(e.u(), 1);
        assert_eq!(e.matrix()[[0, 0]], t.matrix()[[2, 0]]);
        assert_eq!(e.matrix()[[0, 1]], t.matrix()[[2, 1]]);
    }

    #[test]
    fn influence_rows_are_subsets_of_stochastic_rows() {
        use crate::seeding::rng_from_seed;
        use rand::Rng;
        let mut rng = rng_from_seed(41);
        for _ in 0..30 {
            let n = rng.random_range(3..25);
            let l = rng.random_range(1..n);
            let mut feats = ndarray::Array2::zeros((n, 2));
            for v in feats.iter_mut() {
                *v = rng.random_range(-2.0..2.0);
            }
            let w = rbf_weights(feats.view(), &KernelConfig::new(1.0)).unwrap();
            let t = build_transition(&w, l).unwrap();
            let e = direct_influence(&t).unwrap();
            for row in e.matrix().rows() {
                assert!(row.iter().all(|&v| v >= 0.0));
                assert!(row.sum() <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        let e = InfluenceTable::from_matrix(array![[0.3, 0.3]]).unwrap();
        assert_eq!(most_influential(&e, 0).unwrap(), 0);
        let e = InfluenceTable::from_matrix(array![[0.1, 0.4, 0.2]]).unwrap();
        assert_eq!(most_influential(&e, 0).unwrap(), 1);
        let e = InfluenceTable::from_matrix(array![[0.7]]).unwrap();
        assert_eq!(most_influential(&e, 0).unwrap(), 0);
    }

    #[test]
    fn major_influence_is_strict_at_the_boundary() {
        let e = InfluenceTable::from_matrix(array![[0.25, 0.25]]).unwrap();
        assert!(!is_major_influencer(&e, 0).unwrap());
        let e = InfluenceTable::from_matrix(array![[0.6, 0.1]]).unwrap();
        assert!(is_major_influencer(&e, 0).unwrap());
    }

    #[test]
    fn zero_rows_have_no_major_influencer() {
        let e = InfluenceTable::from_matrix(array![[0.0, 0.0], [0.4, 0.1]]).unwrap();
        assert!(!is_major_influencer(&e, 0).unwrap());
        assert_eq!(e.zero_rows(), vec![0]);
        let m = mir(&e).unwrap();
        assert_eq!(m.mir, vec![1, 0]);
    }

    #[test]
    fn sole_labelled_input_majorly_influences_everything() {
        let t = three_point_transition();
        let e = direct_influence(&t).unwrap();
        assert!(is_major_influencer(&e, 0).unwrap());
        assert!(is_major_influencer(&e, 1).unwrap());
        let m = mir(&e).unwrap();
        assert_eq!(m.mir, vec![2]);
        assert_eq!(m.ranking, vec![0]);
    }

    #[test]
    fn rows_without_majority_count_nothing() {
        let e = InfluenceTable::from_matrix(array![[0.2, 0.2], [0.3, 0.3]]).unwrap();
        let m = mir(&e).unwrap();
        assert_eq!(m.mir, vec![0, 0]);
        assert_eq!(m.ranking, vec![0, 1]);
    }

    #[test]
    fn disjoint_majorities_count_and_rank() {
        // Labelled input 0 majorly influences rows 0-2, input 1 influences
        // row 3. Checked against a literal share scan.
        let e = InfluenceTable::from_matrix(array![
            [0.6, 0.1],
            [0.5, 0.2],
            [0.8, 0.05],
            [0.1, 0.7]
        ])
        .unwrap();
        let m = mir(&e).unwrap();

        let mut oracle = vec![0usize; e.l()];
        for i in 0..e.u() {
            let row = e.matrix().row(i).to_vec();
            let total: f64 = row.iter().sum();
            for (j, &v) in row.iter().enumerate() {
                if total > 0.0 && v / total > 0.5 {
                    oracle[j] += 1;
                }
            }
        }
        assert_eq!(m.mir, oracle);
        assert_eq!(m.mir, vec![3, 1]);
        assert_eq!(m.ranking, vec![0, 1]);
    }

    #[test]
    fn ranking_breaks_ties_by_ascending_index() {
        let e = InfluenceTable::from_matrix(array![
            [0.1, 0.8, 0.05],
            [0.05, 0.1, 0.8],
        ])
        .unwrap();
        let m = mir(&e).unwrap();
        assert_eq!(m.mir, vec![0, 1, 1]);
        assert_eq!(m.ranking, vec![1, 2, 0]);
    }

    #[test]
    fn mir_totals_never_exceed_unlabelled_count() {
        use crate::seeding::rng_from_seed;
        use rand::Rng;
        let mut rng = rng_from_seed(43);
        for _ in 0..30 {
            let n = rng.random_range(4..30);
            let l = rng.random_range(1..n - 1);
            let mut feats = ndarray::Array2::zeros((n, 2));
            for v in feats.iter_mut() {
                *v = rng.random_range(-3.0..3.0);
            }
            let w = rbf_weights(feats.view(), &KernelConfig::new(4.0)).unwrap();
            let t = build_transition(&w, l).unwrap();
            let e = direct_influence(&t).unwrap();
            let m = mir(&e).unwrap();
            assert!(m.mir.iter().sum::<usize>() <= t.u());
            // Consistency: a passing column is the argmax of its row.
            for i in 0..e.u() {
                if is_major_influencer(&e, i).unwrap() {
                    let best = most_influential(&e, i).unwrap();
                    let m = e.matrix();
                    let row = m.row(i);
                    let total: f64 = row.sum();
                    assert!(row[best] / total > 0.5);
                }
            }
        }
    }
}
