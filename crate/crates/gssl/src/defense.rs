//! Countermeasures against label poisoning: relabelling the most influential
//! inputs versus labelling additional inputs.
//!
//! The relabelling defender does not know which labels were poisoned; it
//! audits the top-MIR labelled inputs and resets each to its verified truth
//! (a no-op where the label was never touched). MIR is computed from the
//! feature graph only, so the defender's ranking is unaffected by the
//! poisoning itself.

use rand::seq::index::sample;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::influence::MirVector;
use crate::kernel::KernelConfig;
use crate::pipeline::{transductive_error, SslAlgorithm};
use crate::seeding::{derive_seed, rng_from_seed};
use crate::ssl::PropagationConfig;

/// Reset the observed label of the top-`m` labelled inputs by MIR rank to
/// their ground truth.
pub fn relabel_top_mir(poisoned: &Dataset, ranking: &MirVector, m: usize) -> Result<Dataset> {
    if m > poisoned.l() {
        return Err(Error::invalid(format!(
            "relabel budget m={m} exceeds l={}",
            poisoned.l()
        )));
    }
    if ranking.mir.len() != poisoned.l() {
        return Err(Error::invalid("MIR vector does not match labelled set"));
    }
    let mut repaired = poisoned.clone();
    for &j in &ranking.ranking[..m] {
        let truth = repaired.truth_labels()[repaired.labelled_idx()[j]];
        repaired.set_observed(j, truth);
    }
    Ok(repaired)
}

/// Move `m` uniformly chosen unlabelled inputs into the labelled set with
/// their true labels. Existing labels — poisoned or not — are untouched.
pub fn label_additional(poisoned: &Dataset, m: usize, seed: u64) -> Result<Dataset> {
    if m > poisoned.u() {
        return Err(Error::invalid(format!(
            "labelling budget m={m} exceeds u={}",
            poisoned.u()
        )));
    }
    let mut grown = poisoned.clone();
    if m == 0 {
        return Ok(grown);
    }
    let mut rng = rng_from_seed(seed);
    let positions = sample(&mut rng, poisoned.u(), m).into_vec();
    grown.promote_unlabelled(&positions);
    Ok(grown)
}

/// Transductive error rates of the three RQ4 arms, all starting from the
/// same poisoned dataset, plus the clean baseline.
#[derive(Debug, Clone, Copy)]
pub struct CountermeasureOutcome {
    pub err_clean: f64,
    pub err_none: f64,
    pub err_relabel: f64,
    pub err_additional: f64,
}

/// Run the three arms (MIR relabelling, additional labelling, none) on an
/// identical poisoned dataset. Each arm that needs randomness derives its
/// own stream from `(seed, arm tag)`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_countermeasures(
    clean: &Dataset,
    poisoned: &Dataset,
    ranking: &MirVector,
    m: usize,
    kernel: &KernelConfig,
    algorithm: SslAlgorithm,
    ssl: &PropagationConfig,
    seed: u64,
) -> Result<CountermeasureOutcome> {
    let err_clean = transductive_error(clean, kernel, algorithm, ssl)?;
    let err_none = transductive_error(poisoned, kernel, algorithm, ssl)?;
    let relabelled = relabel_top_mir(poisoned, ranking, m)?;
    let err_relabel = transductive_error(&relabelled, kernel, algorithm, ssl)?;
    let grown = label_additional(poisoned, m, derive_seed(seed, "lab-arm", 0))?;
    let err_additional = transductive_error(&grown, kernel, algorithm, ssl)?;
    Ok(CountermeasureOutcome {
        err_clean,
        err_none,
        err_relabel,
        err_additional,
    })
}
