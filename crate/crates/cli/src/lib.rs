//! Experiment runners and report plumbing behind the `bandlab` binary.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::ExperimentConfig;
pub use report::{Criterion, ExperimentReport};
