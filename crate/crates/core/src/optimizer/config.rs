use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::CoreError;

/// Multiple-access scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rsma,
    Sdma,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rsma => "rsma",
            Mode::Sdma => "sdma",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Big-M constant; derived from the problem with [`big_m_bound`] when absent.
    pub big_m: Option<f64>,
    /// Stop once successive objectives differ by less than this.
    pub epsilon: f64,
    pub max_sca_iters: u32,
    pub mode: Mode,
    /// Relaxed indicators at or above `1 - z_round_delta` round to 1.
    pub z_round_delta: f64,
    pub solver_tol: f64,
    pub solver_max_iter: u32,
    /// Extra bits demanded of scheduled users inside the subproblem so that
    /// the exact rate check still passes at solver accuracy.
    pub rate_margin: f64,
    /// Use the exact cone `|h^H p|^2 <= beta * sigma` instead of its
    /// expansion for the upper SINR bound.
    pub exact_beta: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            big_m: None,
            epsilon: 1e-4,
            max_sca_iters: 100,
            mode: Mode::Rsma,
            z_round_delta: 1e-3,
            solver_tol: rsma_conic::DEFAULT_TOL,
            solver_max_iter: rsma_conic::DEFAULT_MAX_ITER,
            rate_margin: 1e-5,
            exact_beta: false,
        }
    }
}

impl OptimizerConfig {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let bad = |msg: String| Err(CoreError::InvalidConfig(msg));
        if let Some(m) = self.big_m {
            if !(m > 0.0 && m.is_finite()) {
                return bad(format!("optimizer.big_m must be > 0, got {m}"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!(
                "optimizer.epsilon must be > 0, got {}",
                self.epsilon
            ));
        }
        if self.max_sca_iters == 0 {
            return bad("optimizer.max_sca_iters must be >= 1".into());
        }
        if !(self.z_round_delta > 0.0 && self.z_round_delta < 0.5) {
            return bad(format!(
                "optimizer.z_round_delta must lie in (0, 0.5), got {}",
                self.z_round_delta
            ));
        }
        if !(self.solver_tol > 0.0 && self.solver_tol.is_finite()) {
            return bad(format!(
                "optimizer.solver_tol must be > 0, got {}",
                self.solver_tol
            ));
        }
        if self.solver_max_iter == 0 {
            return bad("optimizer.solver_max_iter must be >= 1".into());
        }
        if !(self.rate_margin >= 0.0 && self.rate_margin.is_finite()) {
            return bad(format!(
                "optimizer.rate_margin must be >= 0, got {}",
                self.rate_margin
            ));
        }
        Ok(())
    }

    pub fn big_m_for(&self, problem: &SlotProblem) -> f64 {
        self.big_m.unwrap_or_else(|| big_m_bound(problem))
    }
}

/// One scheduling decision: channels, per-user required rates `I_k`,
/// per-user weights `w_k` and the power budget.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotProblem {
    pub channels: ChannelSet,
    pub required_rates: Vec<f64>,
    pub weights: Vec<f64>,
    pub total_power: f64,
}

impl SlotProblem {
    pub fn new(
        channels: ChannelSet,
        required_rates: Vec<f64>,
        weights: Vec<f64>,
        total_power: f64,
    ) -> Result<Self, CoreError> {
        let k = channels.num_users();
        if required_rates.len() != k || weights.len() != k {
            return Err(CoreError::InvalidDimensions(format!(
                "{k} users but {} rates and {} weights",
                required_rates.len(),
                weights.len()
            )));
        }
        if let Some(i) = required_rates
            .iter()
            .find(|&&i| !(i > 0.0 && i.is_finite()))
        {
            return Err(CoreError::InvalidProblem(format!(
                "required rate must be > 0, got {i}"
            )));
        }
        if let Some(w) = weights.iter().find(|&&w| !(w >= 0.0 && w.is_finite())) {
            return Err(CoreError::InvalidProblem(format!(
                "weight must be >= 0, got {w}"
            )));
        }
        if !(total_power > 0.0 && total_power.is_finite()) {
            return Err(CoreError::InvalidProblem(format!(
                "total power must be > 0, got {total_power}"
            )));
        }
        Ok(Self {
            channels,
            required_rates,
            weights,
            total_power,
        })
    }

    pub fn num_users(&self) -> usize {
        self.channels.num_users()
    }

    pub fn num_antennas(&self) -> usize {
        self.channels.num_antennas()
    }

    /// `sum_{k not scheduled} w_k`.
    pub fn unscheduled_weight(&self, scheduled: &[bool]) -> f64 {
        self.weights
            .iter()
            .zip(scheduled)
            .filter(|(_, &s)| !s)
            .fold(0.0, |acc, (w, _)| acc + w)
    }
}

/// `M = max_k I_k + log2(1 + P_total max_k ||h_k||^2) + 1`.
pub fn big_m_bound(problem: &SlotProblem) -> f64 {
    let max_rate = problem.required_rates.iter().copied().fold(0.0, f64::max);
    max_rate + (1.0 + problem.total_power * problem.channels.max_gain()).log2() + 1.0
}
