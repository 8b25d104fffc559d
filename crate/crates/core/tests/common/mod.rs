#![allow(dead_code)]

use rsma_core::model::rate_report;
use rsma_core::optimizer::{ScheduleResult, SlotProblem};

/// Raw-formula check of a returned schedule: rates of scheduled users,
/// power budget and common-rate shares.
pub fn audit_schedule(problem: &SlotProblem, result: &ScheduleResult) -> Result<(), String> {
    let report = rate_report(&problem.channels, &result.precoders, &result.scheduled)
        .map_err(|e| e.to_string())?;
    for &k in &result.scheduled {
        let total = result.shares.shares[k] + report.rate_private[k];
        if total < problem.required_rates[k] - 1e-4 {
            return Err(format!(
                "user {k}: c + R = {total} < I = {}",
                problem.required_rates[k]
            ));
        }
    }
    let power = result.precoders.total_power();
    if power > problem.total_power * (1.0 + 1e-6) {
        return Err(format!("power {power} exceeds {}", problem.total_power));
    }
    if let Some(c) = result.shares.shares.iter().find(|&&c| c < 0.0) {
        return Err(format!("negative share {c}"));
    }
    let sum: f64 = result.shares.shares.iter().sum();
    if !result.scheduled.is_empty() && sum > report.common_rate + 1e-6 {
        return Err(format!(
            "shares {sum} exceed common rate {}",
            report.common_rate
        ));
    }
    if result.scheduled.is_empty() && sum > 1e-12 {
        return Err(format!("shares {sum} with nobody scheduled"));
    }
    Ok(())
}
