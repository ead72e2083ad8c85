//! Experiment harness for forced transport, Littlewood-Paley diagnostics
//! and perturbed 2D Euler runs.

pub mod config;
pub mod error;
pub mod experiments;
pub mod record;
pub mod svg;

pub use config::{ExperimentConfig, Overrides};
pub use error::CliError;
pub use record::ExperimentRecord;
