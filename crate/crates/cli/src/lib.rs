//! Experiment runner: loads a JSON experiment config, runs the requested
//! harness and writes CSV rows, a JSON summary and a run manifest.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{config_hash, load_config, ModeChoice, Overrides};
pub use error::CliError;
pub use run::{run, Experiment, RunReport};
