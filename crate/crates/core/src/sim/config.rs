use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::model::AoiiConfig;
use crate::optimizer::{Mode, OptimizerConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Deterministic two-user array pair parametrized by `theta`.
    Geometric,
    Rayleigh,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Geometric => "geometric",
            Scenario::Rayleigh => "rayleigh",
        })
    }
}

/// How last-accurate timestamps `V` are chosen.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VMode {
    #[default]
    Zero,
    /// One value per user.
    Fixed(Vec<u64>),
    /// I.i.d. uniform on `{0, ..., max}`.
    Uniform(u64),
}

impl VMode {
    /// Largest value `V` can take; decision slots start here so that
    /// `t >= V` always holds.
    pub fn max_value(&self) -> u64 {
        match self {
            VMode::Zero => 0,
            VMode::Fixed(values) => values.iter().copied().max().unwrap_or(0),
            VMode::Uniform(max) => *max,
        }
    }
}

impl fmt::Display for VMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VMode::Zero => f.write_str("zero"),
            VMode::Fixed(values) => {
                let parts: Vec<String> = values.iter().map(u64::to_string).collect();
                write!(f, "fixed({})", parts.join(" "))
            }
            VMode::Uniform(max) => write!(f, "uniform({max})"),
        }
    }
}

/// A single angle or a list of angles, in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Theta {
    One(f64),
    Many(Vec<f64>),
}

impl Theta {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Theta::One(v) => vec![*v],
            Theta::Many(v) => v.clone(),
        }
    }
}

fn default_realizations() -> usize {
    1
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Rsma, Mode::Sdma]
}

fn default_true() -> bool {
    true
}

fn default_slots() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(rename = "N")]
    pub num_antennas: usize,
    #[serde(rename = "K")]
    pub num_users: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Theta>,
    pub snr_db: Vec<f64>,
    #[serde(rename = "I_values")]
    pub i_values: Vec<f64>,
    #[serde(default = "default_realizations")]
    pub num_realizations: usize,
    #[serde(default)]
    pub v_mode: VMode,
    #[serde(default)]
    pub aoii: AoiiConfig,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    pub seed: u64,
    /// Horizon of closed-loop trajectories.
    #[serde(default = "default_slots")]
    pub slots: u64,
    /// Replaces the SNR-derived power budget; zero disables transmission.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_power_override: Option<f64>,
    /// Retry RSMA from the SDMA schedule when the cold start does worse.
    #[serde(default = "default_true")]
    pub rsma_warm_start: bool,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CoreError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `P_total = 10^(snr_db / 10)` unless overridden.
    pub fn total_power(&self, snr_db: f64) -> f64 {
        self.total_power_override
            .unwrap_or_else(|| 10f64.powf(snr_db / 10.0))
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.theta.as_ref().map(Theta::values).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let bad = |msg: String| Err(CoreError::InvalidConfig(msg));
        if self.num_antennas == 0 {
            return bad("N must be >= 1".into());
        }
        if self.num_users == 0 {
            return bad("K must be >= 1".into());
        }
        if self.snr_db.is_empty() {
            return bad("snr_db must not be empty".into());
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return bad(format!("snr_db entries must be finite, got {s}"));
        }
        if self.i_values.is_empty() {
            return bad("I_values must not be empty".into());
        }
        if let Some(i) = self.i_values.iter().find(|&&i| !(i > 0.0 && i.is_finite())) {
            return bad(format!("I_values entries must be > 0, got {i}"));
        }
        if self.num_realizations == 0 {
            return bad("num_realizations must be >= 1".into());
        }
        if self.slots == 0 {
            return bad("slots must be >= 1".into());
        }
        if self.modes.is_empty() {
            return bad("modes must not be empty".into());
        }
        if self
            .modes
            .iter()
            .enumerate()
            .any(|(i, m)| self.modes[..i].contains(m))
        {
            return bad("modes must not repeat".into());
        }
        if let VMode::Fixed(values) = &self.v_mode {
            if values.len() != self.num_users {
                return bad(format!(
                    "v_mode.fixed needs {} entries, got {}",
                    self.num_users,
                    values.len()
                ));
            }
        }
        match (self.scenario, &self.theta) {
            (Scenario::Geometric, None) => {
                return bad("theta is required for the geometric scenario".into())
            }
            (Scenario::Geometric, Some(t)) => {
                if self.num_users != 2 {
                    return bad(format!(
                        "geometric scenario needs K = 2, got {}",
                        self.num_users
                    ));
                }
                let values = t.values();
                if values.is_empty() {
                    return bad("theta must not be empty".into());
                }
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return bad(format!("theta entries must be finite, got {v}"));
                }
            }
            (Scenario::Rayleigh, Some(_)) => {
                return bad("theta only applies to the geometric scenario".into())
            }
            (Scenario::Rayleigh, None) => {}
        }
        if let Some(p) = self.total_power_override {
            if !(p >= 0.0 && p.is_finite()) {
                return bad(format!("total_power_override must be >= 0, got {p}"));
            }
        }
        self.aoii.validate()?;
        self.optimizer.validate()?;
        Ok(())
    }
}
