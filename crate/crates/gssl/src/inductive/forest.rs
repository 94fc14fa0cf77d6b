//! Random forest: bootstrap-sampled trees with Gini-greedy axis-aligned
//! splits and majority voting. Each split considers a random subset of
//! `ceil(sqrt(D))` features; trees grow until pure or below the split
//! minimum, with no pruning.

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_training_inputs, Model};
use crate::dataset::Label;
use crate::error::Result;
use crate::seeding::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> ForestConfig {
        ForestConfig {
            n_trees: 100,
            min_samples_split: 2,
            max_depth: None,
            seed: 0,
        }
    }
}

/// Gini impurity of a binary node with the given class counts.
/// A pure node scores exactly 0, a balanced node exactly 0.5.
pub fn gini_impurity(neg: usize, pos: usize) -> f64 {
    let total = neg + pos;
    if total == 0 {
        return 0.0;
    }
    let p_neg = neg as f64 / total as f64;
    let p_pos = pos as f64 / total as f64;
    1.0 - p_neg * p_neg - p_pos * p_pos
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(Label),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn predict(&self, x: ArrayView1<'_, f64>) -> Label {
        match self {
            Node::Leaf(label) => *label,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Forest {
    trees: Vec<Node>,
}

impl Forest {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

impl Model for Forest {
    fn predict(&self, x: ArrayView1<'_, f64>) -> Label {
        let pos_votes = self
            .trees
            .iter()
            .filter(|t| t.predict(x) == Label::Pos)
            .count();
        // Vote ties resolve to the positive class.
        if 2 * pos_votes >= self.trees.len() {
            Label::Pos
        } else {
            Label::Neg
        }
    }
}

fn majority(labels: &[Label], rows: &[usize]) -> Label {
    let pos = rows.iter().filter(|&&i| labels[i] == Label::Pos).count();
    if 2 * pos >= rows.len() {
        Label::Pos
    } else {
        Label::Neg
    }
}

struct TreeBuilder<'a> {
    features: ArrayView2<'a, f64>,
    labels: &'a [Label],
    min_samples_split: usize,
    max_depth: Option<usize>,
    n_candidates: usize,
}

impl TreeBuilder<'_> {
    fn build(&self, rows: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> Node {
        let pos = rows.iter().filter(|&&i| self.labels[i] == Label::Pos).count();
        let neg = rows.len() - pos;
        let node_impurity = gini_impurity(neg, pos);
        let depth_reached = self.max_depth.is_some_and(|d| depth >= d);
        if node_impurity == 0.0 || rows.len() < self.min_samples_split || depth_reached {
            return Node::Leaf(majority(self.labels, &rows));
        }
        let d = self.features.ncols();
        let mut candidates = sample(rng, d, self.n_candidates.min(d)).into_vec();
        candidates.sort_unstable();
        let mut best: Option<(f64, usize, f64)> = None; // (weighted impurity, feature, threshold)
        for &feature in &candidates {
            let mut ordered: Vec<(f64, Label)> = rows
                .iter()
                .map(|&i| (self.features[[i, feature]], self.labels[i]))
                .collect();
            ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
            let total_pos = pos;
            let mut left_pos = 0usize;
            let mut left_n = 0usize;
            for w in 0..ordered.len() - 1 {
                left_n += 1;
                if ordered[w].1 == Label::Pos {
                    left_pos += 1;
                }
                if ordered[w].0 == ordered[w + 1].0 {
                    continue; // no boundary between equal values
                }
                let right_n = rows.len() - left_n;
                let right_pos = total_pos - left_pos;
                let wl = left_n as f64 / rows.len() as f64;
                let wr = right_n as f64 / rows.len() as f64;
                let impurity = wl * gini_impurity(left_n - left_pos, left_pos)
                    + wr * gini_impurity(right_n - right_pos, right_pos);
                if best.map_or(true, |(b, _, _)| impurity < b) {
                    let threshold = 0.5 * (ordered[w].0 + ordered[w + 1].0);
                    best = Some((impurity, feature, threshold));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            // Every candidate feature is constant on this node.
            return Node::Leaf(majority(self.labels, &rows));
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.features[[i, feature]] <= threshold);
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.build(left_rows, depth + 1, rng)),
            right: Box::new(self.build(right_rows, depth + 1, rng)),
        }
    }
}

/// Train a forest. Tree `i` draws its bootstrap sample and split features
/// from a stream seeded by `(seed, i)`, so training is reproducible and
/// trees stay decorrelated.
pub fn train_forest(
    features: ArrayView2<'_, f64>,
    labels: &[Label],
    config: &ForestConfig,
) -> Result<Forest> {
    let n = features.nrows();
    check_training_inputs(n, labels)?;
    let n_candidates = (features.ncols() as f64).sqrt().ceil() as usize;
    let builder = TreeBuilder {
        features,
        labels,
        min_samples_split: config.min_samples_split.max(2),
        max_depth: config.max_depth,
        n_candidates: n_candidates.max(1),
    };
    let mut trees = Vec::with_capacity(config.n_trees);
    for tree_idx in 0..config.n_trees {
        let mut rng = rng_from_seed(derive_seed(config.seed, "tree", tree_idx as u64));
        // One bootstrap sample of size n per tree.
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        trees.push(builder.build(rows, 0, &mut rng));
    }
    Ok(Forest { trees })
}
