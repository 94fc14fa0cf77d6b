//! Datasets, labelled/unlabelled splits and synthetic data generation.
//!
//! A [`Dataset`] owns a dense feature matrix, the ground-truth labels of all
//! inputs, and the partition into labelled and unlabelled index sets. The
//! labels visible to learning algorithms (and to an attacker) are the
//! `observed_labels`, which coincide with the truth until a poison plan is
//! applied.

use std::fmt;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::rng_from_seed;

/// A binary class label. Canonical values are -1 and +1 regardless of how a
/// data file encodes its classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// Signed value, -1.0 or +1.0.
    pub fn value(self) -> f64 {
        match self {
            Label::Neg => -1.0,
            Label::Pos => 1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Neg => Label::Pos,
            Label::Pos => Label::Neg,
        }
    }

    /// Sign-based prediction from a score. Ties (|score| < 1e-12) resolve to
    /// `Pos` deterministically; callers that need to know about ties count
    /// them separately.
    pub fn from_score(score: f64) -> Label {
        if score < -1e-12 {
            Label::Neg
        } else {
            Label::Pos
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value() as i32)
    }
}

/// How labelled/unlabelled splits are drawn.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of inputs that keep their label, in (0, 1).
    pub labelled_fraction: f64,
    pub seed: u64,
}

/// Synthetic dataset generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    GaussianBlobs,
    TwoMoons,
}

/// Parameters for synthetic dataset generation. Class centres for
/// `gaussian_blobs` sit at `-separation/2` and `+separation/2` on the first
/// axis; `separation` is therefore the distance between centres.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub generator: Generator,
    pub n_per_class: usize,
    pub dimension: usize,
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
}

/// File formats accepted by [`load_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    /// Comma-separated values, no header, one row per input, the last column
    /// is the label.
    DenseCsv,
    /// `label index:value ...` lines with 1-based indices. When `dimension`
    /// is `None` the feature count is inferred from the largest index seen.
    SparseSvmlight { dimension: Option<usize> },
}

/// A set of inputs with ground-truth labels and a labelled/unlabelled split.
///
/// `labelled_idx[j]` is the dataset index of the j-th labelled input and
/// `observed_labels[j]` is the label that learning sees for it. Position
/// indices `0..l` into the labelled set are the currency used by influence
/// rankings, poison plans and relabelling.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Array2<f64>,
    truth_labels: Vec<Label>,
    labelled_idx: Vec<usize>,
    unlabelled_idx: Vec<usize>,
    observed_labels: Vec<Label>,
}

impl Dataset {
    /// Build a fully labelled dataset (every input labelled, observed =
    /// truth). Splits are applied afterwards with [`split_labelled`].
    pub fn fully_labelled(features: Array2<f64>, truth_labels: Vec<Label>) -> Result<Dataset> {
        if features.nrows() != truth_labels.len() {
            return Err(Error::invalid(format!(
                "feature rows ({}) != labels ({})",
                features.nrows(),
                truth_labels.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
        let n = features.nrows();
        Ok(Dataset {
            features,
            observed_labels: truth_labels.clone(),
            truth_labels,
            labelled_idx: (0..n).collect(),
            unlabelled_idx: Vec::new(),
        })
    }

    /// Rebuild a dataset from explicit parts. Checks every invariant: the
    /// index sets partition `0..n`, and observed labels align with
    /// `labelled_idx`.
    pub fn from_parts(
        features: Array2<f64>,
        truth_labels: Vec<Label>,
        labelled_idx: Vec<usize>,
        unlabelled_idx: Vec<usize>,
        observed_labels: Vec<Label>,
    ) -> Result<Dataset> {
        let n = features.nrows();
        if truth_labels.len() != n {
            return Err(Error::invalid("labels do not match feature rows"));
        }
        if labelled_idx.len() != observed_labels.len() {
            return Err(Error::invalid("observed labels do not match labelled set"));
        }
        let mut seen = vec![false; n];
        for &i in labelled_idx.iter().chain(unlabelled_idx.iter()) {
            if i >= n || seen[i] {
                return Err(Error::invalid(format!(
                    "index {i} out of range or duplicated in split"
                )));
            }
            seen[i] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::invalid("split does not cover all inputs"));
        }
        Ok(Dataset {
            features,
            truth_labels,
            labelled_idx,
            unlabelled_idx,
            observed_labels,
        })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn dimension(&self) -> usize {
        self.features.ncols()
    }

    /// Number of labelled inputs.
    pub fn l(&self) -> usize {
        self.labelled_idx.len()
    }

    /// Number of unlabelled inputs.
    pub fn u(&self) -> usize {
        self.unlabelled_idx.len()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn truth_labels(&self) -> &[Label] {
        &self.truth_labels
    }

    pub fn labelled_idx(&self) -> &[usize] {
        &self.labelled_idx
    }

    pub fn unlabelled_idx(&self) -> &[usize] {
        &self.unlabelled_idx
    }

    /// The labels visible to learning, aligned with `labelled_idx`.
    pub fn observed_labels(&self) -> &[Label] {
        &self.observed_labels
    }

    /// Features reordered so the labelled inputs come first, in
    /// `labelled_idx` order, followed by the unlabelled inputs. Graph and
    /// solver code works in this ordering.
    pub fn ssl_ordered_features(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n(), self.dimension()));
        for (row, &i) in self
            .labelled_idx
            .iter()
            .chain(self.unlabelled_idx.iter())
            .enumerate()
        {
            out.row_mut(row).assign(&self.features.row(i));
        }
        out
    }

    /// Ground-truth labels of the unlabelled inputs, in `unlabelled_idx`
    /// order.
    pub fn unlabelled_truth(&self) -> Vec<Label> {
        self.unlabelled_idx
            .iter()
            .map(|&i| self.truth_labels[i])
            .collect()
    }

    /// Replace the observed label at labelled position `j`.
    pub(crate) fn set_observed(&mut self, j: usize, label: Label) {
        self.observed_labels[j] = label;
    }

    /// Promote unlabelled inputs (given as positions into `unlabelled_idx`)
    /// into the labelled set with their true labels.
    pub(crate) fn promote_unlabelled(&mut self, positions: &[usize]) {
        let mut chosen: Vec<usize> = positions.iter().map(|&p| self.unlabelled_idx[p]).collect();
        chosen.sort_unstable();
        for &i in &chosen {
            self.labelled_idx.push(i);
            self.observed_labels.push(self.truth_labels[i]);
        }
        self.unlabelled_idx.retain(|i| !chosen.contains(i));
    }
}

fn both_classes_present(labels: &[Label]) -> bool {
    labels.contains(&Label::Pos) && labels.contains(&Label::Neg)
}

/// Generate a synthetic, fully labelled dataset. Deterministic for a fixed
/// seed; exactly `n_per_class` points per class, class `Neg` rows first.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.n_per_class < 2 {
        return Err(Error::invalid("n_per_class must be at least 2"));
    }
    if spec.dimension == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(spec.separation >= 0.0 && spec.noise >= 0.0) {
        return Err(Error::invalid("separation and noise must be non-negative"));
    }
    let mut rng = rng_from_seed(spec.seed);
    let n = 2 * spec.n_per_class;
    let mut features = Array2::zeros((n, spec.dimension));
    let mut labels = Vec::with_capacity(n);

    match spec.generator {
        Generator::GaussianBlobs => {
            for (class_idx, label) in [Label::Neg, Label::Pos].into_iter().enumerate() {
                let centre = (class_idx as f64 - 0.5) * spec.separation;
                for p in 0..spec.n_per_class {
                    let row = class_idx * spec.n_per_class + p;
                    for d in 0..spec.dimension {
                        let noise: f64 = rng.sample(StandardNormal);
                        let base = if d == 0 { centre } else { 0.0 };
                        features[[row, d]] = base + spec.noise * noise;
                    }
                    labels.push(label);
                }
            }
        }
        Generator::TwoMoons => {
            if spec.dimension != 2 {
                return Err(Error::invalid("two_moons requires dimension 2"));
            }
            // Upper moon is class Neg, lower moon (shifted right and down by
            // `separation`) is class Pos.
            for (class_idx, label) in [Label::Neg, Label::Pos].into_iter().enumerate() {
                for p in 0..spec.n_per_class {
                    let row = class_idx * spec.n_per_class + p;
                    let t = std::f64::consts::PI * p as f64 / (spec.n_per_class - 1) as f64;
                    let (x, y) = if class_idx == 0 {
                        (t.cos(), t.sin())
                    } else {
                        (1.0 - t.cos(), 0.5 - t.sin() - spec.separation)
                    };
                    let nx: f64 = rng.sample(StandardNormal);
                    let ny: f64 = rng.sample(StandardNormal);
                    features[[row, 0]] = x + spec.noise * nx;
                    features[[row, 1]] = y + spec.noise * ny;
                    labels.push(label);
                }
            }
        }
    }
    Dataset::fully_labelled(features, labels)
}

/// Split a dataset into labelled and unlabelled parts by uniform sampling.
///
/// `l = round(labelled_fraction * n)`. The draw is redrawn from the same
/// random stream until both classes appear among the labelled inputs; a
/// one-class labelled set would make label inference degenerate.
pub fn split_labelled(data: &Dataset, spec: &SplitSpec) -> Result<Dataset> {
    let n = data.n();
    if n < 2 {
        return Err(Error::invalid("dataset must contain at least 2 inputs"));
    }
    if !both_classes_present(data.truth_labels()) {
        return Err(Error::invalid("dataset must contain both classes"));
    }
    let l = (spec.labelled_fraction * n as f64).round() as usize;
    if l < 2 {
        return Err(Error::invalid(format!(
            "labelled_fraction {} yields l={l} < 2",
            spec.labelled_fraction
        )));
    }
    if l >= n {
        return Err(Error::invalid(format!(
            "labelled_fraction {} leaves no unlabelled inputs",
            spec.labelled_fraction
        )));
    }

    let mut rng = rng_from_seed(spec.seed);
    const MAX_REDRAWS: usize = 100_000;
    for _ in 0..MAX_REDRAWS {
        let mut labelled: Vec<usize> = sample(&mut rng, n, l).into_vec();
        labelled.sort_unstable();
        let observed: Vec<Label> = labelled.iter().map(|&i| data.truth_labels[i]).collect();
        if !both_classes_present(&observed) {
            continue;
        }
        let mut is_labelled = vec![false; n];
        for &i in &labelled {
            is_labelled[i] = true;
        }
        let unlabelled: Vec<usize> = (0..n).filter(|&i| !is_labelled[i]).collect();
        return Dataset::from_parts(
            data.features.clone(),
            data.truth_labels.clone(),
            labelled,
            unlabelled,
            observed,
        );
    }
    Err(Error::invalid(
        "could not draw a split containing both classes (class balance too extreme)",
    ))
}

fn parse_label(raw: f64, line: usize) -> Result<Label> {
    // Canonicalize file encodings: +1 stays positive, -1 and 0 map to the
    // negative class. Anything else is rejected.
    if raw == 1.0 {
        Ok(Label::Pos)
    } else if raw == -1.0 || raw == 0.0 {
        Ok(Label::Neg)
    } else {
        Err(Error::parse(line, "non-binary label"))
    }
}

/// Load a dataset from a file. The result is fully labelled; apply
/// [`split_labelled`] afterwards.
pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat) -> Result<Dataset> {
    let text = fs::read_to_string(path.as_ref())
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.as_ref().display())))?;
    parse_dataset(&text, format)
}

/// Parse dataset text in the given format (separated from I/O for testing).
pub fn parse_dataset(text: &str, format: DatasetFormat) -> Result<Dataset> {
    match format {
        DatasetFormat::DenseCsv => parse_dense_csv(text),
        DatasetFormat::SparseSvmlight { dimension } => parse_svmlight(text, dimension),
    }
}

fn parse_dense_csv(text: &str) -> Result<Dataset> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(Error::parse(line_no, "row needs at least one feature and a label"));
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::parse(
                    line_no,
                    format!("inconsistent column count (expected {w}, found {})", fields.len()),
                ));
            }
            _ => {}
        }
        let mut values = Vec::with_capacity(fields.len() - 1);
        for f in &fields[..fields.len() - 1] {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(line_no, format!("malformed value '{f}'")))?;
            values.push(v);
        }
        let label_raw: f64 = fields[fields.len() - 1]
            .parse()
            .map_err(|_| Error::parse(line_no, "malformed label"))?;
        labels.push(parse_label(label_raw, line_no)?);
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::parse(1, "empty dataset"));
    }
    let d = rows[0].len();
    let mut features = Array2::zeros((rows.len(), d));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            features[[i, j]] = v;
        }
    }
    Dataset::fully_labelled(features, labels)
}

fn parse_svmlight(text: &str, declared_dim: Option<usize>) -> Result<Dataset> {
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    let mut max_idx = 0usize;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let label_raw: f64 = parts
            .next()
            .unwrap()
            .parse()
            .map_err(|_| Error::parse(line_no, "malformed label"))?;
        labels.push(parse_label(label_raw, line_no)?);
        let mut row = Vec::new();
        for pair in parts {
            let (i_str, v_str) = pair
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, format!("malformed pair '{pair}'")))?;
            let i: usize = i_str
                .parse()
                .map_err(|_| Error::parse(line_no, format!("malformed index '{i_str}'")))?;
            if i == 0 {
                return Err(Error::parse(line_no, "svmlight indices are 1-based"));
            }
            let v: f64 = v_str
                .parse()
                .map_err(|_| Error::parse(line_no, format!("malformed value '{v_str}'")))?;
            if let Some(d) = declared_dim {
                if i > d {
                    return Err(Error::parse(
                        line_no,
                        format!("index {i} exceeds declared dimension {d}"),
                    ));
                }
            }
            max_idx = max_idx.max(i);
            row.push((i - 1, v));
        }
        entries.push(row);
    }
    if entries.is_empty() {
        return Err(Error::parse(1, "empty dataset"));
    }
    let d = declared_dim.unwrap_or(max_idx);
    if d == 0 {
        return Err(Error::parse(1, "no features found"));
    }
    let mut features = Array2::zeros((entries.len(), d));
    for (row, entry) in entries.iter().enumerate() {
        for &(col, v) in entry {
            features[[row, col]] = v;
        }
    }
    Dataset::fully_labelled(features, labels)
}
