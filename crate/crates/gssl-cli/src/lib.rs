//! Experiment harness and CLI around the `gssl` library: seeded study
//! pipelines with CSV reports, plotting, and one-shot commands for
//! inference, influence ranking, attacks and defenses.

pub mod cli;
pub mod config;
pub mod harness;
pub mod plot;
pub mod report;

pub use cli::run;
