//! Label-poisoning attacks under a flip budget.
//!
//! The influence-driven attack flips the `k` labelled inputs with the
//! highest MIR. Two baselines are provided: a uniform random selection and a
//! greedy oracle that repeatedly flips whichever label most increases the
//! true transductive error (it sees the ground truth, which the
//! influence-driven attack never does). Every attack records how long its
//! selection took.

use std::time::Instant;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::influence::{direct_influence, mir, MirVector};
use crate::kernel::{build_transition, rbf_weights, KernelConfig, TransitionMatrix};
use crate::seeding::rng_from_seed;
use crate::ssl::{closed_form_with_factors, propagation_factors};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMethod {
    Mir,
    Random,
    GreedyOracle,
}

impl std::fmt::Display for AttackMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AttackMethod::Mir => "mir",
            AttackMethod::Random => "random",
            AttackMethod::GreedyOracle => "greedy_oracle",
        };
        write!(f, "{s}")
    }
}

/// A set of labelled positions to flip. Flipping is the binary label
/// negation `y -> -y`; applying a plan never touches features or truth
/// labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoisonPlan {
    pub method: AttackMethod,
    #[serde(rename = "k")]
    pub budget_k: usize,
    pub flips: Vec<usize>,
    pub selection_time_s: f64,
}

impl PoisonPlan {
    fn validate_for(&self, data: &Dataset) -> Result<()> {
        if self.flips.len() != self.budget_k {
            return Err(Error::invalid("plan size does not match its budget"));
        }
        let mut seen = vec![false; data.l()];
        for &j in &self.flips {
            if j >= data.l() || seen[j] {
                return Err(Error::invalid(format!(
                    "flip index {j} out of range or duplicated"
                )));
            }
            seen[j] = true;
        }
        Ok(())
    }
}

fn check_budget(k: usize, l: usize) -> Result<()> {
    if k > l {
        return Err(Error::invalid(format!("budget k={k} exceeds l={l}")));
    }
    Ok(())
}

/// Flip the top-`k` labelled inputs of an already-computed MIR ranking.
pub fn mir_attack(data: &Dataset, ranking: &MirVector, k: usize) -> Result<PoisonPlan> {
    let start = Instant::now();
    check_budget(k, data.l())?;
    if ranking.mir.len() != data.l() {
        return Err(Error::invalid("MIR vector does not match labelled set"));
    }
    let flips = ranking.ranking[..k].to_vec();
    Ok(PoisonPlan {
        method: AttackMethod::Mir,
        budget_k: k,
        flips,
        selection_time_s: start.elapsed().as_secs_f64(),
    })
}

/// MIR attack given a prebuilt transition matrix. The recorded selection
/// time covers the method-specific work only: extracting the influence view
/// of the transition matrix, counting MIR and ranking.
pub fn mir_attack_with_transition(
    data: &Dataset,
    t_bar: &TransitionMatrix,
    k: usize,
) -> Result<PoisonPlan> {
    let start = Instant::now();
    check_budget(k, data.l())?;
    let table = direct_influence(t_bar)?;
    let ranking = mir(&table)?;
    let flips = ranking.ranking[..k].to_vec();
    Ok(PoisonPlan {
        method: AttackMethod::Mir,
        budget_k: k,
        flips,
        selection_time_s: start.elapsed().as_secs_f64(),
    })
}

/// MIR attack from raw features; the selection time additionally includes
/// building the similarity graph and transition matrix.
pub fn mir_attack_from_features(
    data: &Dataset,
    kernel: &KernelConfig,
    k: usize,
) -> Result<PoisonPlan> {
    let start = Instant::now();
    check_budget(k, data.l())?;
    let feats = data.ssl_ordered_features();
    let w = rbf_weights(feats.view(), kernel)?;
    let t_bar = build_transition(&w, data.l())?;
    let table = direct_influence(&t_bar)?;
    let ranking = mir(&table)?;
    let flips = ranking.ranking[..k].to_vec();
    Ok(PoisonPlan {
        method: AttackMethod::Mir,
        budget_k: k,
        flips,
        selection_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Uniform random selection of `k` labelled inputs, without replacement.
pub fn random_attack(data: &Dataset, k: usize, seed: u64) -> Result<PoisonPlan> {
    let start = Instant::now();
    check_budget(k, data.l())?;
    let mut rng = rng_from_seed(seed);
    let mut flips = sample(&mut rng, data.l(), k).into_vec();
    flips.sort_unstable();
    Ok(PoisonPlan {
        method: AttackMethod::Random,
        budget_k: k,
        flips,
        selection_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Greedy oracle baseline: `k` rounds, each flipping the label whose flip
/// maximizes the exact transductive error of label propagation, ties broken
/// by the lowest labelled index.
///
/// The attacker here is assumed to know the true labels of the unlabelled
/// inputs. The graph does not depend on labels, so `(I - T_uu)` is
/// factorized once and every candidate evaluation reuses the factors — each
/// candidate still gets a full closed-form rerun of the inference.
pub fn greedy_oracle_attack(data: &Dataset, kernel: &KernelConfig, k: usize) -> Result<PoisonPlan> {
    let start = Instant::now();
    let l = data.l();
    check_budget(k, l)?;
    if data.u() == 0 {
        return Err(Error::NoUnlabelledInputs);
    }
    let feats = data.ssl_ordered_features();
    let w = rbf_weights(feats.view(), kernel)?;
    let t_bar = build_transition(&w, l)?;
    let factors = propagation_factors(&t_bar)?;
    let truth_u = data.unlabelled_truth();

    let mut labels: Vec<Label> = data.observed_labels().to_vec();
    let mut flipped = vec![false; l];
    let mut flips = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for c in 0..l {
            if flipped[c] {
                continue;
            }
            labels[c] = labels[c].flipped();
            let result = closed_form_with_factors(&factors, &t_bar, &labels);
            labels[c] = labels[c].flipped();
            let wrong = truth_u
                .iter()
                .enumerate()
                .filter(|(j, &t)| result.predicted[l + j] != t)
                .count();
            let err = wrong as f64 / truth_u.len() as f64;
            if best.map_or(true, |(_, b)| err > b) {
                best = Some((c, err));
            }
        }
        let (choice, _) = best.expect("budget does not exceed l");
        flipped[choice] = true;
        labels[choice] = labels[choice].flipped();
        flips.push(choice);
    }
    Ok(PoisonPlan {
        method: AttackMethod::GreedyOracle,
        budget_k: k,
        flips,
        selection_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Apply a plan, producing a new dataset with the observed labels negated at
/// the planned positions. Truth labels and features are untouched.
pub fn apply_plan(data: &Dataset, plan: &PoisonPlan) -> Result<Dataset> {
    plan.validate_for(data)?;
    let mut poisoned = data.clone();
    for &j in &plan.flips {
        let current = poisoned.observed_labels()[j];
        poisoned.set_observed(j, current.flipped());
    }
    Ok(poisoned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, split_labelled, Generator, SplitSpec, SyntheticSpec};
    use crate::ssl::{label_propagation_closed_form, transductive_error_rate};
    use ndarray::array;

    /// Three collinear points, the leftmost labelled, all truly positive.
    fn three_point_dataset() -> Dataset {
        let features = array![[0.0], [1.0], [2.0]];
        Dataset::from_parts(
            features,
            vec![Label::Pos, Label::Pos, Label::Pos],
            vec![0],
            vec![1, 2],
            vec![Label::Pos],
        )
        .unwrap()
    }

    fn blob_split(n_per_class: usize, fraction: f64, seed: u64) -> Dataset {
        let data = generate_synthetic(&SyntheticSpec {
            generator: Generator::GaussianBlobs,
            n_per_class,
            dimension: 2,
            separation: 4.0,
            noise: 1.0,
            seed,
        })
        .unwrap();
        split_labelled(
            &data,
            &SplitSpec {
                labelled_fraction: fraction,
                seed: seed.wrapping_add(1),
            },
        )
        .unwrap()
    }

    #[test]
    fn empty_budget_is_the_identity() {
        let data = blob_split(20, 0.25, 3);
        let plan = mir_attack_from_features(&data, &KernelConfig::new(1.0), 0).unwrap();
        assert!(plan.flips.is_empty());
        let poisoned = apply_plan(&data, &plan).unwrap();
        assert_eq!(poisoned.observed_labels(), data.observed_labels());
    }

    #[test]
    fn flipping_the_single_source_inverts_every_inference() {
        let data = three_point_dataset();
        let kernel = KernelConfig::new(0.25);
        let plan = mir_attack_from_features(&data, &kernel, 1).unwrap();
        assert_eq!(plan.flips, vec![0]);
        let poisoned = apply_plan(&data, &plan).unwrap();
        let w = rbf_weights(poisoned.ssl_ordered_features().view(), &kernel).unwrap();
        let t = build_transition(&w, 1).unwrap();
        let r = label_propagation_closed_form(&t, poisoned.observed_labels()).unwrap();
        assert_eq!(transductive_error_rate(&r, &poisoned).unwrap(), 1.0);
    }

    #[test]
    fn top_k_follows_the_ranking() {
        let data = blob_split(10, 0.3, 9);
        // mir = [3, 1, 2, ...pad] over l labelled inputs.
        let l = data.l();
        let mut counts = vec![0usize; l];
        counts[0] = 3;
        counts[1] = 1;
        counts[2] = 2;
        let mut ranking: Vec<usize> = (0..l).collect();
        ranking.sort_by_key(|&j| (std::cmp::Reverse(counts[j]), j));
        let mv = MirVector {
            mir: counts,
            ranking,
        };
        let plan = mir_attack(&data, &mv, 2).unwrap();
        assert_eq!(plan.flips, vec![0, 2]);
    }

    #[test]
    fn random_attack_is_seeded_and_exhaustive_at_full_budget() {
        let data = blob_split(10, 0.4, 4);
        let l = data.l();
        let full = random_attack(&data, l, 7).unwrap();
        let mut sorted = full.flips.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..l).collect::<Vec<_>>());

        let a = random_attack(&data, 3, 11).unwrap();
        let b = random_attack(&data, 3, 11).unwrap();
        assert_eq!(a.flips, b.flips);

        let none = random_attack(&data, 0, 11).unwrap();
        assert!(none.flips.is_empty());

        assert!(random_attack(&data, l + 1, 0).is_err());
    }

    #[test]
    fn greedy_selects_the_sole_candidate() {
        let data = three_point_dataset();
        let plan = greedy_oracle_attack(&data, &KernelConfig::new(0.25), 1).unwrap();
        assert_eq!(plan.flips, vec![0]);
    }

    #[test]
    fn greedy_first_step_dominates_every_single_flip() {
        let kernel = KernelConfig::new(2.0);
        for seed in [1u64, 2, 3] {
            let data = blob_split(15, 0.3, seed);
            let l = data.l();
            let greedy = greedy_oracle_attack(&data, &kernel, 1).unwrap();
            let error_of = |plan: &PoisonPlan| {
                let poisoned = apply_plan(&data, plan).unwrap();
                let w = rbf_weights(poisoned.ssl_ordered_features().view(), &kernel).unwrap();
                let t = build_transition(&w, l).unwrap();
                let r = label_propagation_closed_form(&t, poisoned.observed_labels()).unwrap();
                transductive_error_rate(&r, &poisoned).unwrap()
            };
            let greedy_err = error_of(&greedy);
            for j in 0..l {
                let single = PoisonPlan {
                    method: AttackMethod::Random,
                    budget_k: 1,
                    flips: vec![j],
                    selection_time_s: 0.0,
                };
                assert!(
                    greedy_err >= error_of(&single) - 1e-12,
                    "seed {seed}: flip {j} beats greedy"
                );
            }
        }
    }

    #[test]
    fn applying_a_plan_twice_is_the_identity() {
        let data = blob_split(12, 0.3, 6);
        let plan = random_attack(&data, 3, 13).unwrap();
        let once = apply_plan(&data, &plan).unwrap();
        assert_ne!(once.observed_labels(), data.observed_labels());
        let twice = apply_plan(&once, &plan).unwrap();
        assert_eq!(twice.observed_labels(), data.observed_labels());
        // Truth labels and features never move.
        assert_eq!(once.truth_labels(), data.truth_labels());
        assert_eq!(once.features(), data.features());
    }

    #[test]
    fn single_flip_plan_changes_exactly_one_label() {
        let features = array![[0.0], [1.0], [2.0], [3.0]];
        let data = Dataset::from_parts(
            features,
            vec![Label::Pos, Label::Neg, Label::Pos, Label::Neg],
            vec![0, 1],
            vec![2, 3],
            vec![Label::Pos, Label::Neg],
        )
        .unwrap();
        let plan = PoisonPlan {
            method: AttackMethod::Mir,
            budget_k: 1,
            flips: vec![0],
            selection_time_s: 0.0,
        };
        let poisoned = apply_plan(&data, &plan).unwrap();
        assert_eq!(poisoned.observed_labels(), &[Label::Neg, Label::Neg]);
    }

    #[test]
    fn plan_serializes_with_flat_schema() {
        let plan = PoisonPlan {
            method: AttackMethod::GreedyOracle,
            budget_k: 2,
            flips: vec![4, 1],
            selection_time_s: 0.25,
        };
        let json = serde_json::to_string(&plan).unwrap();
        assert!(json.contains("\"method\":\"greedy_oracle\""));
        assert!(json.contains("\"k\":2"));
        assert!(json.contains("\"flips\":[4,1]"));
        assert!(json.contains("selection_time_s"));
    }
}
