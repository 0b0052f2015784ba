//! Batch runner for the ergolab experiments: JSON configuration in, CSV or
//! JSON tables and a run manifest out.

pub mod config;
pub mod run;

pub use config::{load_config, parse_config, ConfigErrors, ExperimentConfig};
pub use run::{run, RunManifest};
