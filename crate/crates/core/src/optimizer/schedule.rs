//! Binary scheduling decisions from a relaxed SCA solution.

use serde::{Deserialize, Serialize};

use super::config::SlotProblem;
use crate::error::CoreError;
use crate::model::{rate_report, success_check, CommonRateShares, PrecoderSet, SUCCESS_MARGIN};

/// `z'_k = 1` when `z_k >= 1 - delta` or `c_k + R_k <= I_k - 1e-9`, with
/// `R_k` recomputed from `precoders`.
pub fn round_schedule(
    problem: &SlotProblem,
    precoders: &PrecoderSet,
    shares: &CommonRateShares,
    z_relaxed: &[f64],
    delta: f64,
) -> Result<Vec<u8>, CoreError> {
    let report = rate_report(&problem.channels, precoders, &[])?;
    Ok((0..problem.num_users())
        .map(|k| {
            let rate = shares.shares[k] + report.rate_private[k];
            u8::from(
                z_relaxed[k] >= 1.0 - delta || rate <= problem.required_rates[k] - SUCCESS_MARGIN,
            )
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub shares: CommonRateShares,
    pub z_binary: Vec<u8>,
    pub scheduled: Vec<usize>,
    pub achieved_aoii: f64,
    /// Users rounded in but dropped because no share allocation let them
    /// meet their rate.
    pub demotions: usize,
}

/// Final shares and schedule. Shares of unscheduled users are released,
/// scheduled shares are scaled down to fit the common rate, leftover common
/// rate goes to the scheduled users with the largest deficits first, and any
/// scheduled user still short of its rate is demoted (largest deficit first,
/// one at a time).
pub fn evaluate(
    problem: &SlotProblem,
    precoders: &PrecoderSet,
    shares: &CommonRateShares,
    z_binary: &[u8],
) -> Result<Evaluation, CoreError> {
    let k_users = problem.num_users();
    if z_binary.len() != k_users || shares.shares.len() != k_users {
        return Err(CoreError::InvalidDimensions(format!(
            "{k_users} users but {} indicators and {} shares",
            z_binary.len(),
            shares.shares.len()
        )));
    }
    let mut z = z_binary.to_vec();
    let mut demotions = 0;
    loop {
        let scheduled: Vec<usize> = (0..k_users).filter(|&k| z[k] == 0).collect();
        let report = rate_report(&problem.channels, precoders, &scheduled)?;
        let mut c = CommonRateShares::zeros(k_users);
        for &k in &scheduled {
            c.shares[k] = shares.shares[k].max(0.0);
        }
        let total = c.total_over(&scheduled);
        if total > report.common_rate {
            let scale = if total > 0.0 {
                report.common_rate / total
            } else {
                0.0
            };
            c.shares.iter_mut().for_each(|v| *v *= scale);
        }
        let deficit = |c: &CommonRateShares, k: usize| {
            problem.required_rates[k] - report.rate_private[k] - c.shares[k]
        };
        let mut slack = (report.common_rate - c.total_over(&scheduled)).max(0.0);
        let mut order = scheduled.clone();
        order.sort_by(|&a, &b| deficit(&c, b).total_cmp(&deficit(&c, a)));
        for &k in &order {
            let d = deficit(&c, k);
            if d > 0.0 && slack > 0.0 {
                let give = d.min(slack);
                c.shares[k] += give;
                slack -= give;
            }
        }
        let worst = scheduled
            .iter()
            .copied()
            .filter(|&k| !success_check(&report, &c, &problem.required_rates, k))
            .max_by(|&a, &b| deficit(&c, a).total_cmp(&deficit(&c, b)));
        match worst {
            Some(k) => {
                z[k] = 1;
                demotions += 1;
            }
            None => {
                let flags: Vec<bool> = z.iter().map(|&v| v == 0).collect();
                return Ok(Evaluation {
                    achieved_aoii: problem.unscheduled_weight(&flags),
                    shares: c,
                    z_binary: z,
                    scheduled,
                    demotions,
                });
            }
        }
    }
}
