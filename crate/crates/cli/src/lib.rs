//! Library surface of the experiment runner (the binary is a thin wrapper,
//! and the integration tests drive these functions directly).

pub mod analyses;
pub mod config;
pub mod error;
pub mod presets;
pub mod runner;

pub use config::{apply_override, AnalysisSpec, ExperimentConfig, InitialSpec};
pub use error::CliError;
pub use runner::{analyze_artifact, expand_glob, run_experiment, sweep};
