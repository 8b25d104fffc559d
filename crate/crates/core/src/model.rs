//! Rate-splitting rate model and age-of-incorrect-information penalties.
//!
//! Every user first decodes the common stream treating all private streams
//! as noise, removes it, then decodes its own private stream treating the
//! other private streams as noise. Noise power is 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{channel_gain, inner, ChannelSet};
use crate::error::CoreError;

/// Absolute slack on rate comparisons.
pub const SUCCESS_MARGIN: f64 = 1e-9;

/// Relative slack on the transmit power budget.
pub const POWER_TOLERANCE: f64 = 1e-6;

/// Common precoder `p_c` and one private precoder `p_k` per user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecoderSet {
    pub common: Vec<Complex64>,
    pub privates: Vec<Vec<Complex64>>,
}

impl PrecoderSet {
    pub fn zeros(num_antennas: usize, num_users: usize) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); num_antennas];
        Self {
            common: zero.clone(),
            privates: vec![zero; num_users],
        }
    }

    pub fn num_users(&self) -> usize {
        self.privates.len()
    }

    /// `tr(P P^H) = ||p_c||^2 + sum_k ||p_k||^2`.
    pub fn total_power(&self) -> f64 {
        channel_gain(&self.common) + self.privates.iter().map(|p| channel_gain(p)).sum::<f64>()
    }

    /// True when the common precoder is exactly zero, i.e. plain SDMA.
    pub fn is_sdma(&self) -> bool {
        self.common.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    pub fn within_budget(&self, total_power: f64) -> bool {
        self.total_power() <= total_power * (1.0 + POWER_TOLERANCE)
    }

    /// Scales every precoder by a common phase `e^{j phi}`.
    pub fn rotated(&self, phi: f64) -> Self {
        let r = Complex64::from_polar(1.0, phi);
        Self {
            common: self.common.iter().map(|v| v * r).collect(),
            privates: self
                .privates
                .iter()
                .map(|p| p.iter().map(|v| v * r).collect())
                .collect(),
        }
    }

    fn check_against(&self, h: &ChannelSet) -> Result<(), CoreError> {
        let n = h.num_antennas();
        if self.privates.len() != h.num_users() {
            return Err(CoreError::InvalidDimensions(format!(
                "{} private precoders for {} users",
                self.privates.len(),
                h.num_users()
            )));
        }
        if self.common.len() != n || self.privates.iter().any(|p| p.len() != n) {
            return Err(CoreError::InvalidDimensions(format!(
                "precoders must have {n} entries"
            )));
        }
        Ok(())
    }
}

fn check_user(h: &ChannelSet, k: usize) -> Result<(), CoreError> {
    if k >= h.num_users() {
        return Err(CoreError::UserOutOfRange {
            index: k,
            num_users: h.num_users(),
        });
    }
    Ok(())
}

/// `|h_k^H p|^2`.
fn received_power(h: &[Complex64], p: &[Complex64]) -> f64 {
    inner(h, p).norm_sqr()
}

/// Private-stream SINR `|h_k^H p_k|^2 / (1 + sum_{i != k} |h_k^H p_i|^2)`.
pub fn sinr_private(h: &ChannelSet, p: &PrecoderSet, k: usize) -> Result<f64, CoreError> {
    p.check_against(h)?;
    check_user(h, k)?;
    let hk = h.user(k);
    let interference: f64 = p
        .privates
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, pi)| received_power(hk, pi))
        .sum();
    Ok(received_power(hk, &p.privates[k]) / (1.0 + interference))
}

/// Common-stream SINR `|h_k^H p_c|^2 / (1 + sum_i |h_k^H p_i|^2)`; every
/// private stream, the user's own included, is noise at this stage.
pub fn sinr_common(h: &ChannelSet, p: &PrecoderSet, k: usize) -> Result<f64, CoreError> {
    p.check_against(h)?;
    check_user(h, k)?;
    let hk = h.user(k);
    let interference: f64 = p.privates.iter().map(|pi| received_power(hk, pi)).sum();
    Ok(received_power(hk, &p.common) / (1.0 + interference))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub sinr_common: Vec<f64>,
    pub sinr_private: Vec<f64>,
    /// `R_{c,k} = log2(1 + gamma_{c,k})` in bits/s/Hz.
    pub rate_common_per_user: Vec<f64>,
    /// `R_k = log2(1 + gamma_k)` in bits/s/Hz.
    pub rate_private: Vec<f64>,
    /// `R_c`: minimum of `R_{c,k}` over the scheduled users, 0 when none.
    pub common_rate: f64,
}

pub fn rate_report(
    h: &ChannelSet,
    p: &PrecoderSet,
    scheduled: &[usize],
) -> Result<RateReport, CoreError> {
    p.check_against(h)?;
    for &k in scheduled {
        check_user(h, k)?;
    }
    let users = 0..h.num_users();
    let sinr_common: Vec<f64> = users
        .clone()
        .map(|k| sinr_common(h, p, k))
        .collect::<Result<_, _>>()?;
    let sinr_private: Vec<f64> = users
        .map(|k| sinr_private(h, p, k))
        .collect::<Result<_, _>>()?;
    let rate_common_per_user: Vec<f64> = sinr_common.iter().map(|g| (1.0 + g).log2()).collect();
    let rate_private = sinr_private.iter().map(|g| (1.0 + g).log2()).collect();
    let common_rate = scheduled
        .iter()
        .map(|&k| rate_common_per_user[k])
        .reduce(f64::min)
        .unwrap_or(0.0);
    Ok(RateReport {
        sinr_common,
        sinr_private,
        rate_common_per_user,
        rate_private,
        common_rate,
    })
}

/// Portion `c_k` of the common rate credited to each user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonRateShares {
    pub shares: Vec<f64>,
}

impl CommonRateShares {
    pub fn zeros(num_users: usize) -> Self {
        Self {
            shares: vec![0.0; num_users],
        }
    }

    pub fn total_over(&self, users: &[usize]) -> f64 {
        users.iter().map(|&k| self.shares[k]).sum()
    }
}

/// `c_k + R_k >= I_k` up to [`SUCCESS_MARGIN`].
pub fn success_check(
    report: &RateReport,
    shares: &CommonRateShares,
    required: &[f64],
    k: usize,
) -> bool {
    shares.shares[k] + report.rate_private[k] >= required[k] - SUCCESS_MARGIN
}

/// Staleness factor `f`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgePenalty {
    /// `f(t) = t - V`.
    #[default]
    Linear,
    /// `f(t) = 1{t - V >= zeta}`.
    Threshold,
}

/// Content-mismatch factor `g`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapPenalty {
    /// `g = (X - X_hat)^2`.
    #[default]
    Square,
    /// `g = 1{|X - X_hat| >= c}`.
    Threshold,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AoiiConfig {
    #[serde(default)]
    pub f: AgePenalty,
    #[serde(default)]
    pub g: GapPenalty,
    /// Time threshold for [`AgePenalty::Threshold`].
    #[serde(default)]
    pub zeta: f64,
    /// Value threshold for [`GapPenalty::Threshold`].
    #[serde(default)]
    pub c_thresh: f64,
}

impl AoiiConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return Err(CoreError::InvalidConfig(format!(
                "aoii.zeta must be >= 0, got {}",
                self.zeta
            )));
        }
        if !(self.c_thresh >= 0.0 && self.c_thresh.is_finite()) {
            return Err(CoreError::InvalidConfig(format!(
                "aoii.c_thresh must be >= 0, got {}",
                self.c_thresh
            )));
        }
        Ok(())
    }

    pub fn age_factor(&self, elapsed: u64) -> f64 {
        match self.f {
            AgePenalty::Linear => elapsed as f64,
            AgePenalty::Threshold => f64::from(u8::from(elapsed as f64 >= self.zeta)),
        }
    }

    pub fn gap(&self, x: f64, x_hat: f64) -> f64 {
        match self.g {
            GapPenalty::Square => (x - x_hat).powi(2),
            GapPenalty::Threshold => f64::from(u8::from((x - x_hat).abs() >= self.c_thresh)),
        }
    }

    /// `f(t) * g(X, X_hat)` at slot `t` with last-accurate time `v`.
    pub fn penalty(&self, t: u64, v: u64, x: f64, x_hat: f64) -> Result<f64, CoreError> {
        if t < v {
            return Err(CoreError::TimestampAhead { t, v });
        }
        Ok(self.age_factor(t - v) * self.gap(x, x_hat))
    }

    /// Penalty at slot `t + 1` after a decision at `t`: zero on success,
    /// otherwise `f(t + 1) * g(X_next, X_hat_next)`.
    pub fn next_slot(
        &self,
        t: u64,
        v: u64,
        x_next: f64,
        x_hat_next: f64,
        success: bool,
    ) -> Result<f64, CoreError> {
        if t + 1 < v {
            return Err(CoreError::TimestampAhead { t: t + 1, v });
        }
        if success {
            return Ok(0.0);
        }
        self.penalty(t + 1, v, x_next, x_hat_next)
    }
}

pub fn aoii_penalty(
    cfg: &AoiiConfig,
    t: u64,
    v: u64,
    x: f64,
    x_hat: f64,
) -> Result<f64, CoreError> {
    cfg.penalty(t, v, x, x_hat)
}

pub fn next_slot_aoii(
    cfg: &AoiiConfig,
    t: u64,
    v: u64,
    x_next: f64,
    x_hat_next: f64,
    success: bool,
) -> Result<f64, CoreError> {
    cfg.next_slot(t, v, x_next, x_hat_next, success)
}
