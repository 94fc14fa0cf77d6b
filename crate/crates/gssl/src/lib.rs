//! Graph-based semi-supervised learning with label-poisoning attacks,
//! influence metrics and countermeasures.
//!
//! The crate covers the full desk-scale workflow:
//!
//! - [`dataset`]: data containers, labelled/unlabelled splits, file loading
//!   and synthetic generation;
//! - [`kernel`]: the RBF similarity graph and its transition/adjacency
//!   normalizations;
//! - [`ssl`]: transductive inference by label propagation (iterative and
//!   closed form) and label spreading;
//! - [`influence`]: direct influence of labelled on unlabelled inputs and
//!   the major-influence-range (MIR) ranking;
//! - [`attack`]: MIR-driven label flipping plus random and greedy-oracle
//!   baselines;
//! - [`defense`]: relabelling the most influential inputs vs. labelling
//!   additional inputs;
//! - [`inductive`]: supervised learners (perceptron, random forest) trained
//!   on known plus inferred labels;
//! - [`stats`]: tie-corrected Kendall and Pearson correlation, run
//!   aggregation.
//!
//! All randomness flows through explicit seeds ([`seeding`]); every
//! operation is deterministic given its inputs.

pub mod attack;
pub mod dataset;
pub mod defense;
pub mod error;
pub mod inductive;
pub mod influence;
pub mod kernel;
pub mod linalg;
pub mod pipeline;
pub mod seeding;
pub mod ssl;
pub mod stats;

pub use error::{Error, Result};
