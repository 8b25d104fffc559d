use std::path::Path;

use rsma_core::optimizer::Mode;
use rsma_core::sim::ExperimentConfig;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Mode selection from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeChoice {
    Rsma,
    Sdma,
    Both,
}

impl ModeChoice {
    pub fn modes(self) -> Vec<Mode> {
        match self {
            ModeChoice::Rsma => vec![Mode::Rsma],
            ModeChoice::Sdma => vec![Mode::Sdma],
            ModeChoice::Both => vec![Mode::Rsma, Mode::Sdma],
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<ModeChoice>,
}

pub fn load_config(path: &Path, overrides: Overrides) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = overrides.mode {
        cfg.modes = mode.modes();
    }
    cfg.validate()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

/// SHA-256 of the effective configuration serialized with sorted keys and
/// no whitespace.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let canonical = serde_json::to_value(cfg)?.to_string();
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}
