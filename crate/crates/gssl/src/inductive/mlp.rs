//! A single-hidden-layer perceptron: rectifier hidden units, one sigmoid
//! output unit, binary cross-entropy loss, plain mini-batch gradient
//! descent. Labels in {-1, +1} map to {0, 1} targets internally; predictions
//! threshold the output probability at 0.5.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_training_inputs, Model};
use crate::dataset::Label;
use crate::error::Result;
use crate::seeding::rng_from_seed;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> MlpConfig {
        MlpConfig {
            hidden_units: 128,
            learning_rate: 0.01,
            epochs: 200,
            batch_size: 32,
            seed: 0,
        }
    }
}

/// Trained perceptron. Parameters are exposed as one flat vector
/// (`w1` row-major, then `b1`, `w2`, `b2`) so gradients can be checked
/// against finite differences from outside.
#[derive(Debug, Clone)]
pub struct Mlp {
    w1: Array2<f64>, // hidden x input
    b1: Array1<f64>,
    w2: Array1<f64>, // hidden
    b2: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (1.0 + (-z.abs()).exp()).ln()
}

fn target01(label: Label) -> f64 {
    match label {
        Label::Neg => 0.0,
        Label::Pos => 1.0,
    }
}

impl Mlp {
    fn new_seeded(input_dim: usize, hidden: usize, seed: u64) -> Mlp {
        let mut rng = rng_from_seed(seed);
        let lim1 = (6.0 / (input_dim + hidden) as f64).sqrt();
        let lim2 = (6.0 / (hidden + 1) as f64).sqrt();
        let mut w1 = Array2::zeros((hidden, input_dim));
        for v in w1.iter_mut() {
            *v = rng.random_range(-lim1..lim1);
        }
        let mut w2 = Array1::zeros(hidden);
        for v in w2.iter_mut() {
            *v = rng.random_range(-lim2..lim2);
        }
        Mlp {
            w1,
            b1: Array1::zeros(hidden),
            w2,
            b2: 0.0,
        }
    }

    pub fn hidden_units(&self) -> usize {
        self.w1.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.w1.ncols()
    }

    /// Pre-sigmoid output for one input.
    fn logit(&self, x: ArrayView1<'_, f64>) -> f64 {
        let mut z = self.b2;
        for h in 0..self.hidden_units() {
            let mut a = self.b1[h];
            for d in 0..self.input_dim() {
                a += self.w1[[h, d]] * x[d];
            }
            if a > 0.0 {
                z += self.w2[h] * a;
            }
        }
        z
    }

    /// Output probability of the positive class.
    pub fn probability(&self, x: ArrayView1<'_, f64>) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Mean binary cross-entropy over a batch.
    pub fn loss(&self, xs: ArrayView2<'_, f64>, labels: &[Label]) -> f64 {
        let mut total = 0.0;
        for (x, &lab) in xs.rows().into_iter().zip(labels) {
            let z = self.logit(x);
            total += softplus(z) - target01(lab) * z;
        }
        total / labels.len() as f64
    }

    /// Analytic gradient of [`Mlp::loss`] with respect to the flat parameter
    /// vector.
    pub fn loss_gradient(&self, xs: ArrayView2<'_, f64>, labels: &[Label]) -> Vec<f64> {
        let hidden = self.hidden_units();
        let dim = self.input_dim();
        let scale = 1.0 / labels.len() as f64;
        let mut g_w1 = Array2::<f64>::zeros((hidden, dim));
        let mut g_b1 = Array1::<f64>::zeros(hidden);
        let mut g_w2 = Array1::<f64>::zeros(hidden);
        let mut g_b2 = 0.0;
        let mut act = vec![0.0; hidden];
        for (x, &lab) in xs.rows().into_iter().zip(labels) {
            let mut z = self.b2;
            for h in 0..hidden {
                let mut a = self.b1[h];
                for d in 0..dim {
                    a += self.w1[[h, d]] * x[d];
                }
                act[h] = a.max(0.0);
                z += self.w2[h] * act[h];
            }
            let delta = (sigmoid(z) - target01(lab)) * scale;
            g_b2 += delta;
            for h in 0..hidden {
                g_w2[h] += delta * act[h];
                if act[h] > 0.0 {
                    let dh = delta * self.w2[h];
                    g_b1[h] += dh;
                    for d in 0..dim {
                        g_w1[[h, d]] += dh * x[d];
                    }
                }
            }
        }
        let mut flat = Vec::with_capacity(self.param_count());
        flat.extend(g_w1.iter());
        flat.extend(g_b1.iter());
        flat.extend(g_w2.iter());
        flat.push(g_b2);
        flat
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    /// Add `delta` to the parameter at flat index `idx` (for finite
    /// difference probes).
    pub fn perturb_param(&mut self, idx: usize, delta: f64) {
        let n1 = self.w1.len();
        let n2 = n1 + self.b1.len();
        let n3 = n2 + self.w2.len();
        if idx < n1 {
            let dim = self.w1.ncols();
            self.w1[[idx / dim, idx % dim]] += delta;
        } else if idx < n2 {
            self.b1[idx - n1] += delta;
        } else if idx < n3 {
            self.w2[idx - n2] += delta;
        } else {
            self.b2 += delta;
        }
    }

    fn apply_gradient(&mut self, grad: &[f64], lr: f64) {
        let n1 = self.w1.len();
        let n2 = n1 + self.b1.len();
        let n3 = n2 + self.w2.len();
        let dim = self.w1.ncols();
        for (idx, &g) in grad.iter().enumerate() {
            let step = lr * g;
            if idx < n1 {
                self.w1[[idx / dim, idx % dim]] -= step;
            } else if idx < n2 {
                self.b1[idx - n1] -= step;
            } else if idx < n3 {
                self.w2[idx - n2] -= step;
            } else {
                self.b2 -= step;
            }
        }
    }
}

impl Model for Mlp {
    fn predict(&self, x: ArrayView1<'_, f64>) -> Label {
        // probability >= 0.5 is the positive class.
        if self.probability(x) >= 0.5 {
            Label::Pos
        } else {
            Label::Neg
        }
    }
}

/// Train by mini-batch gradient descent. Deterministic for a fixed seed:
/// initialization and the per-epoch shuffles both draw from the same seeded
/// stream.
pub fn train_mlp(
    features: ArrayView2<'_, f64>,
    labels: &[Label],
    config: &MlpConfig,
) -> Result<Mlp> {
    let n = features.nrows();
    check_training_inputs(n, labels)?;
    let mut model = Mlp::new_seeded(features.ncols(), config.hidden_units.max(1), config.seed);
    let mut rng = rng_from_seed(crate::seeding::derive_seed(config.seed, "mlp-shuffle", 0));
    let batch = config.batch_size.max(1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut xs = Array2::zeros((batch, features.ncols()));
    let mut ys = Vec::with_capacity(batch);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            ys.clear();
            for (row, &i) in chunk.iter().enumerate() {
                xs.row_mut(row).assign(&features.row(i));
                ys.push(labels[i]);
            }
            let grad = model.loss_gradient(xs.slice(ndarray::s![..chunk.len(), ..]), &ys);
            model.apply_gradient(&grad, config.learning_rate);
        }
    }
    Ok(model)
}
