use std::io::Write;
use std::path::Path;

use rsma_conic::{solve, ConicStatus, SolveOptions};
use serde::{Deserialize, Serialize};

use super::config::{Mode, OptimizerConfig, SlotProblem};
use super::schedule::{evaluate, round_schedule};
use super::state::{initialize, warm_start, SCAState};
use super::subproblem::{assemble_subproblem, ProductRow};
use crate::error::CoreError;
use crate::model::{CommonRateShares, PrecoderSet};

/// Why the iteration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    IterationCap,
    /// A later subproblem could not be solved; the last solved iterate is kept.
    SubproblemFailure,
}

/// Where the returned schedule came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Sca,
    /// The SDMA schedule used to seed an RSMA run was better than the run
    /// itself and is returned instead.
    SdmaIncumbent,
}

/// One line of the per-run trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: u32,
    pub objective: f64,
    pub z: Vec<f64>,
    pub status: ConicStatus,
    pub product_row: ProductRow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    pub mode: Mode,
    pub precoders: PrecoderSet,
    pub shares: CommonRateShares,
    pub z_relaxed: Vec<f64>,
    /// `z'_k = 1` means user `k` is not scheduled.
    pub z_binary: Vec<u8>,
    pub scheduled: Vec<usize>,
    /// `sum_{k not scheduled} w_k`.
    pub achieved_aoii: f64,
    pub sca_iterations: u32,
    pub subproblem_statuses: Vec<ConicStatus>,
    pub trace: Vec<TraceRecord>,
    pub termination: Termination,
    pub demotions: usize,
    pub origin: Origin,
}

impl ScheduleResult {
    pub fn num_scheduled(&self) -> usize {
        self.scheduled.len()
    }

    /// Solved subproblem objectives, one per iteration.
    pub fn objectives(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.objective).collect()
    }

    /// Writes the trace as JSON lines.
    pub fn write_trace(&self, path: impl AsRef<Path>) -> Result<(), CoreError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for record in &self.trace {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Successive convex approximation from the default starting point.
pub fn sca_solve(
    problem: &SlotProblem,
    cfg: &OptimizerConfig,
) -> Result<ScheduleResult, CoreError> {
    sca_solve_from(problem, cfg, initialize(problem, cfg))
}

/// Successive convex approximation from a given expansion point.
pub fn sca_solve_from(
    problem: &SlotProblem,
    cfg: &OptimizerConfig,
    init: SCAState,
) -> Result<ScheduleResult, CoreError> {
    cfg.validate()?;
    let opts = SolveOptions {
        tol: cfg.solver_tol,
        max_iter: cfg.solver_max_iter,
    };
    let mut state = init;
    let mut previous = state.objective;
    let mut shares: Option<CommonRateShares> = None;
    let mut statuses = Vec::new();
    let mut trace = Vec::new();
    let mut termination = Termination::IterationCap;

    for iteration in 1..=cfg.max_sca_iters {
        let mut sub = assemble_subproblem(problem, &state, cfg, true)?;
        let mut sol = solve(&sub.program, &opts)?;
        if !sol.is_optimal() && sub.product_row == ProductRow::Enforced {
            statuses.push(sol.status);
            sub = assemble_subproblem(problem, &state, cfg, false)?;
            sol = solve(&sub.program, &opts)?;
        }
        statuses.push(sol.status);
        if !sol.is_optimal() {
            if iteration == 1 {
                return Err(CoreError::InfeasibleInitialization(sol.status.to_string()));
            }
            termination = Termination::SubproblemFailure;
            break;
        }
        shares = Some(sub.layout.read_shares(&sol.primal));
        state = sub.layout.read_state(problem, &sol.primal);
        trace.push(TraceRecord {
            iteration,
            objective: sol.objective_value,
            z: state.z.clone(),
            status: sol.status,
            product_row: sub.product_row,
        });
        let converged = (sol.objective_value - previous).abs() < cfg.epsilon;
        previous = sol.objective_value;
        if converged {
            termination = Termination::Converged;
            break;
        }
    }

    let shares = shares.expect("first iteration either solved or returned");
    let z_binary = round_schedule(
        problem,
        &state.precoders,
        &shares,
        &state.z,
        cfg.z_round_delta,
    )?;
    let eval = evaluate(problem, &state.precoders, &shares, &z_binary)?;
    Ok(ScheduleResult {
        mode: cfg.mode,
        precoders: state.precoders,
        shares: eval.shares,
        z_relaxed: state.z,
        z_binary: eval.z_binary,
        scheduled: eval.scheduled,
        achieved_aoii: eval.achieved_aoii,
        sca_iterations: trace.len() as u32,
        subproblem_statuses: statuses,
        trace,
        termination,
        demotions: eval.demotions,
        origin: Origin::Sca,
    })
}

/// RSMA run seeded from an SDMA schedule. The SDMA schedule is itself a
/// valid RSMA schedule (zero common power), so it is returned whenever the
/// seeded run does no better.
pub fn sca_solve_warm(
    problem: &SlotProblem,
    cfg: &OptimizerConfig,
    sdma: &ScheduleResult,
) -> Result<ScheduleResult, CoreError> {
    let cfg = OptimizerConfig {
        mode: Mode::Rsma,
        ..cfg.clone()
    };
    let z0: Vec<f64> = sdma.z_binary.iter().map(|&v| f64::from(v)).collect();
    let seeded = sca_solve_from(problem, &cfg, warm_start(problem, &sdma.precoders, &z0));
    match seeded {
        Ok(result) if result.achieved_aoii <= sdma.achieved_aoii => Ok(result),
        Ok(_) | Err(CoreError::InfeasibleInitialization(_)) => Ok(ScheduleResult {
            mode: Mode::Rsma,
            origin: Origin::SdmaIncumbent,
            ..sdma.clone()
        }),
        Err(e) => Err(e),
    }
}

/// SDMA and RSMA schedules for one problem. RSMA starts cold and falls back
/// to a run seeded from the SDMA schedule when the cold start does worse.
pub fn solve_both(
    problem: &SlotProblem,
    cfg: &OptimizerConfig,
) -> Result<(ScheduleResult, ScheduleResult), CoreError> {
    let sdma = sca_solve(
        problem,
        &OptimizerConfig {
            mode: Mode::Sdma,
            ..cfg.clone()
        },
    )?;
    let cold = sca_solve(
        problem,
        &OptimizerConfig {
            mode: Mode::Rsma,
            ..cfg.clone()
        },
    );
    let rsma = match cold {
        Ok(r) if r.achieved_aoii <= sdma.achieved_aoii => r,
        _ => sca_solve_warm(problem, cfg, &sdma)?,
    };
    Ok((sdma, rsma))
}
