//! Experiment runner behind the `mcpfilt` binary.

pub mod config;
pub mod plot;
pub mod run;
pub mod tables;

pub use config::{ExperimentConfig, Overrides};
pub use run::{run_experiment, run_static, run_trials, RunOutcome};
