use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{Mode, OptimizerConfig, SlotProblem};
use crate::channel::{channel_gain, inner};
use crate::model::PrecoderSet;

/// Share of the budget placed on the common stream by a cold start.
pub const INIT_COMMON_FRACTION: f64 = 0.2;

/// Share of the budget moved onto the common stream when an RSMA run is
/// seeded from an SDMA solution.
pub const WARM_COMMON_FRACTION: f64 = 0.05;

/// Expansion point carried between iterations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SCAState {
    pub precoders: PrecoderSet,
    /// Relaxed indicators; `z_k = 1` means user `k` is not scheduled.
    pub z: Vec<f64>,
    pub beta: Vec<f64>,
    pub sigma_p: Vec<f64>,
    pub sigma_c: Vec<f64>,
    /// `sum_k w_k z_k`.
    pub objective: f64,
}

impl SCAState {
    /// State whose `beta`, `sigma_p`, `sigma_c` are the exact private SINRs and
    /// interference-plus-noise terms of `precoders`.
    pub fn from_precoders(problem: &SlotProblem, precoders: PrecoderSet, z: Vec<f64>) -> Self {
        let h = &problem.channels;
        let k_users = h.num_users();
        let mut beta = Vec::with_capacity(k_users);
        let mut sigma_p = Vec::with_capacity(k_users);
        let mut sigma_c = Vec::with_capacity(k_users);
        for k in 0..k_users {
            let received: Vec<f64> = precoders
                .privates
                .iter()
                .map(|p| inner(h.user(k), p).norm_sqr())
                .collect();
            let total: f64 = received.iter().sum();
            let sp = 1.0 + total - received[k];
            sigma_p.push(sp);
            sigma_c.push(1.0 + total);
            beta.push(received[k] / sp);
        }
        let objective = problem.weights.iter().zip(&z).map(|(w, z)| w * z).sum();
        Self {
            precoders,
            z,
            beta,
            sigma_p,
            sigma_c,
            objective,
        }
    }
}

fn aligned(h: &[Complex64], power: f64) -> Vec<Complex64> {
    let scale = (power / channel_gain(h)).sqrt();
    h.iter().map(|v| v * scale).collect()
}

/// Matched-filter privates with an equal power split and, in RSMA mode, a
/// fifth of the budget on a common precoder aligned with the weakest user.
/// All relaxed indicators start at 0.5.
pub fn initialize(problem: &SlotProblem, cfg: &OptimizerConfig) -> SCAState {
    let h = &problem.channels;
    let k_users = h.num_users();
    let common_power = match cfg.mode {
        Mode::Rsma => INIT_COMMON_FRACTION * problem.total_power,
        Mode::Sdma => 0.0,
    };
    let private_power = (problem.total_power - common_power) / k_users as f64;
    let mut precoders = PrecoderSet::zeros(h.num_antennas(), k_users);
    for k in 0..k_users {
        precoders.privates[k] = aligned(h.user(k), private_power);
    }
    if common_power > 0.0 {
        let gains = h.gains();
        let weakest = (0..k_users)
            .min_by(|&a, &b| gains[a].total_cmp(&gains[b]))
            .expect("at least one user");
        precoders.common = aligned(h.user(weakest), common_power);
    }
    SCAState::from_precoders(problem, precoders, vec![0.5; k_users])
}

/// RSMA expansion point built from an SDMA schedule: privates scaled so
/// that [`WARM_COMMON_FRACTION`] of their power moves onto a common
/// precoder aligned with the weakest user, indicators taken from `z`.
pub fn warm_start(problem: &SlotProblem, sdma: &PrecoderSet, z: &[f64]) -> SCAState {
    let h = &problem.channels;
    let used = sdma.total_power();
    let budget = if used > 0.0 {
        used
    } else {
        problem.total_power
    };
    let keep = (1.0 - WARM_COMMON_FRACTION).sqrt();
    let mut precoders = PrecoderSet {
        common: vec![Complex64::new(0.0, 0.0); h.num_antennas()],
        privates: sdma
            .privates
            .iter()
            .map(|p| p.iter().map(|v| v * keep).collect())
            .collect(),
    };
    let gains = h.gains();
    let weakest = (0..h.num_users())
        .min_by(|&a, &b| gains[a].total_cmp(&gains[b]))
        .expect("at least one user");
    precoders.common = aligned(h.user(weakest), WARM_COMMON_FRACTION * budget);
    SCAState::from_precoders(problem, precoders, z.to_vec())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;
    use crate::channel::{rayleigh, ChannelSet};

    #[test]
    fn single_user_sdma_init() {
        let h = ChannelSet::new(vec![vec![Complex64::new(1.0, 0.0); 2]]).unwrap();
        let problem = SlotProblem::new(h, vec![1.0], vec![1.0], 1.0).unwrap();
        let s = initialize(&problem, &OptimizerConfig::with_mode(Mode::Sdma));
        for v in &s.precoders.privates[0] {
            assert!((v - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
        assert!((s.beta[0] - 2.0).abs() < 1e-12);
        assert_eq!(s.sigma_p[0], 1.0);
        assert!(s.precoders.is_sdma());
        assert_eq!(s.z, vec![0.5]);
    }

    #[test]
    fn rsma_init_uses_full_budget() {
        let h = rayleigh(4, 3, 5).unwrap();
        let problem = SlotProblem::new(h, vec![2.0; 3], vec![1.0; 3], 100.0).unwrap();
        let s = initialize(&problem, &OptimizerConfig::default());
        assert!((s.precoders.total_power() - 100.0).abs() < 1e-12);
        assert!((channel_gain(&s.precoders.common) - 20.0).abs() < 1e-12);
        assert_eq!(s.z, vec![0.5; 3]);
        assert!((s.objective - 1.5).abs() < 1e-15);
    }

    #[test]
    fn rsma_common_follows_weakest_user() {
        let h = rayleigh(4, 3, 9).unwrap();
        let gains = h.gains();
        let weakest = (0..3)
            .min_by(|&a, &b| gains[a].total_cmp(&gains[b]))
            .unwrap();
        let problem = SlotProblem::new(h.clone(), vec![2.0; 3], vec![1.0; 3], 10.0).unwrap();
        let s = initialize(&problem, &OptimizerConfig::default());
        let corr = inner(h.user(weakest), &s.precoders.common).norm();
        let bound = (channel_gain(h.user(weakest)) * 2.0).sqrt();
        assert!((corr - bound).abs() < 1e-12);
    }

    #[test]
    fn sigma_definitions() {
        let h = rayleigh(3, 2, 1).unwrap();
        let problem = SlotProblem::new(h.clone(), vec![1.0; 2], vec![1.0; 2], 10.0).unwrap();
        let s = initialize(&problem, &OptimizerConfig::default());
        for k in 0..2 {
            let other = inner(h.user(k), &s.precoders.privates[1 - k]).norm_sqr();
            let own = inner(h.user(k), &s.precoders.privates[k]).norm_sqr();
            assert!((s.sigma_p[k] - (1.0 + other)).abs() < 1e-12);
            assert!((s.sigma_c[k] - (1.0 + other + own)).abs() < 1e-12);
            assert!((s.beta[k] - own / (1.0 + other)).abs() < 1e-12);
        }
    }

    #[test]
    fn warm_start_preserves_power() {
        let h = rayleigh(4, 3, 2).unwrap();
        let problem = SlotProblem::new(h, vec![2.0; 3], vec![1.0; 3], 50.0).unwrap();
        let sdma = initialize(&problem, &OptimizerConfig::with_mode(Mode::Sdma));
        let warm = warm_start(&problem, &sdma.precoders, &[0.0, 1.0, 0.0]);
        assert!((warm.precoders.total_power() - 50.0).abs() < 1e-9);
        assert!(!warm.precoders.is_sdma());
        assert_eq!(warm.z, vec![0.0, 1.0, 0.0]);
    }
}
