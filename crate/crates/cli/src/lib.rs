//! Experiment driver for `lincon-es-core`: TOML configs, trace and report files, plots.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{parse_config, ConfigErrors, ExperimentConfig};
pub use experiment::{exit, run_experiment, ExperimentError, Outcome, RunOptions};
