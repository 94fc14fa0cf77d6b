//! Oracle checks for the influence module: the major-influencer sets must
//! match a literal share scan, and the MIR ranking must point in the same
//! direction as actually flipping labels one at a time.

use gssl::dataset::{generate_synthetic, split_labelled, Generator, SplitSpec, SyntheticSpec};
use gssl::influence::{direct_influence, is_major_influencer, mir, most_influential};
use gssl::kernel::{build_transition, rbf_weights, KernelConfig};
use gssl::seeding::rng_from_seed;
use gssl::ssl::{label_propagation_closed_form, transductive_error_rate};
use gssl::stats::{kendall_tau, Correlation};
use ndarray::Array2;
use rand::Rng;

#[test]
fn major_influencer_sets_match_a_brute_force_share_scan() {
    let mut rng = rng_from_seed(61);
    for case in 0..20 {
        let n = rng.random_range(4..=30);
        let l = rng.random_range(1..n);
        let mut feats = Array2::zeros((n, 2));
        for v in feats.iter_mut() {
            *v = rng.random_range(-2.0..2.0);
        }
        let gamma = [0.5, 2.0, 8.0][case % 3];
        let w = rbf_weights(feats.view(), &KernelConfig::new(gamma)).unwrap();
        let t = build_transition(&w, l).unwrap();
        let table = direct_influence(&t).unwrap();
        let counted = mir(&table).unwrap();

        // Brute force: test every (row, column) share against 0.5 directly
        // on the transition matrix.
        let u = n - l;
        let mut oracle_counts = vec![0usize; l];
        let tm = t.matrix();
        for i in 0..u {
            let total: f64 = (0..l).map(|j| tm[[l + i, j]]).sum();
            let mut passing: Vec<usize> = Vec::new();
            for j in 0..l {
                if total > 0.0 && tm[[l + i, j]] / total > 0.5 {
                    passing.push(j);
                }
            }
            assert!(passing.len() <= 1, "two shares cannot both exceed 0.5");
            let module_says = is_major_influencer(&table, i).unwrap();
            assert_eq!(module_says, !passing.is_empty(), "case {case} row {i}");
            if let Some(&j) = passing.first() {
                oracle_counts[j] += 1;
                assert_eq!(most_influential(&table, i).unwrap(), j);
            }
        }
        assert_eq!(counted.mir, oracle_counts, "case {case}");
        assert!(counted.mir.iter().sum::<usize>() <= u);
    }
}

#[test]
fn mir_ranks_in_the_direction_of_single_flip_damage() {
    // Micro-scale version of the correlation protocol: flip each labelled
    // input alone, rerun propagation exactly, and count the damage. The MIR
    // ordering must correlate positively (median over instances).
    let mut taus = Vec::new();
    for seed in 0..9u64 {
        let data = generate_synthetic(&SyntheticSpec {
            generator: Generator::GaussianBlobs,
            n_per_class: 14,
            dimension: 2,
            separation: 3.0,
            noise: 0.8,
            seed: 1000 + seed,
        })
        .unwrap();
        let split = split_labelled(
            &data,
            &SplitSpec {
                labelled_fraction: 0.25,
                seed: 2000 + seed,
            },
        )
        .unwrap();
        let kernel = KernelConfig::new(6.0);
        let w = rbf_weights(split.ssl_ordered_features().view(), &kernel).unwrap();
        let t = build_transition(&w, split.l()).unwrap();
        let ranking = mir(&direct_influence(&t).unwrap()).unwrap();

        let mut flip_errors = Vec::with_capacity(split.l());
        for j in 0..split.l() {
            let mut labels = split.observed_labels().to_vec();
            labels[j] = labels[j].flipped();
            let r = label_propagation_closed_form(&t, &labels).unwrap();
            flip_errors.push(transductive_error_rate(&r, &split).unwrap());
        }
        let mir_values: Vec<f64> = ranking.mir.iter().map(|&c| c as f64).collect();
        match kendall_tau(&mir_values, &flip_errors).unwrap() {
            Correlation::Coefficient(tau) => taus.push(tau),
            Correlation::Degenerate => taus.push(0.0),
        }
    }
    taus.sort_by(f64::total_cmp);
    let median = taus[taus.len() / 2];
    assert!(
        median > 0.0,
        "median Kendall tau between MIR and single-flip error must be positive, got {median} ({taus:?})"
    );
}
