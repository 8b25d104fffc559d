use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Scenario, VMode};
use super::process::{apply_ack, step_process, SemanticState};
use crate::channel::{geometric_pair, rayleigh_stream, ChannelSet};
use crate::error::CoreError;
use crate::model::AoiiConfig;
use crate::optimizer::{sca_solve, solve_both, Mode, OptimizerConfig, ScheduleResult, SlotProblem};
use crate::rng::{GaussianStream, Purpose};

/// One solved (or failed) scheduling decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario: Scenario,
    pub mode: Mode,
    pub snr_db: f64,
    pub i_value: f64,
    pub realization: u64,
    pub v_mode: String,
    pub theta: Option<f64>,
    pub slot: Option<u64>,
    pub aoii: Option<f64>,
    pub cumulative_aoii: Option<f64>,
    pub num_scheduled: Option<usize>,
    pub sca_iters: Option<u32>,
    pub error: Option<String>,
}

impl MetricsRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Averages over the successful realizations of one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub mode: Mode,
    pub snr_db: f64,
    pub i_value: f64,
    pub theta: Option<f64>,
    pub mean_aoii: Option<f64>,
    pub mean_scheduled: Option<f64>,
    pub num_ok: usize,
    pub num_failed: usize,
}

/// Paired RSMA/SDMA comparison of one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub snr_db: f64,
    pub i_value: f64,
    pub theta: Option<f64>,
    /// Percentage of realizations in which RSMA schedules strictly more users.
    pub pct_rsma_more: f64,
    /// Realizations in which both modes solved.
    pub paired: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub rows: Vec<MetricsRow>,
    pub cells: Vec<CellSummary>,
    pub comparisons: Vec<Comparison>,
}

impl MetricsRecord {
    fn from_rows(rows: Vec<MetricsRow>, modes: &[Mode], num_realizations: usize) -> Self {
        let mut keys: Vec<(f64, f64, Option<f64>)> = Vec::new();
        for r in &rows {
            let key = (r.snr_db, r.i_value, r.theta);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let in_cell = |mode: Mode, key: (f64, f64, Option<f64>)| {
            rows.iter()
                .filter(move |r| r.mode == mode && (r.snr_db, r.i_value, r.theta) == key)
        };
        let mut cells = Vec::new();
        let mut comparisons = Vec::new();
        for &key in &keys {
            for &mode in modes {
                let ok: Vec<&MetricsRow> = in_cell(mode, key).filter(|r| r.is_ok()).collect();
                let failed = in_cell(mode, key).filter(|r| !r.is_ok()).count();
                let mean = |f: &dyn Fn(&MetricsRow) -> f64| {
                    (!ok.is_empty()).then(|| ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64)
                };
                cells.push(CellSummary {
                    mode,
                    snr_db: key.0,
                    i_value: key.1,
                    theta: key.2,
                    mean_aoii: mean(&|r| r.aoii.unwrap_or(0.0)),
                    mean_scheduled: mean(&|r| r.num_scheduled.unwrap_or(0) as f64),
                    num_ok: ok.len(),
                    num_failed: failed,
                });
            }
            if modes.contains(&Mode::Rsma) && modes.contains(&Mode::Sdma) {
                let mut paired = 0;
                let mut more = 0;
                for rsma in in_cell(Mode::Rsma, key).filter(|r| r.is_ok()) {
                    let sdma = in_cell(Mode::Sdma, key).find(|r| {
                        r.realization == rsma.realization && r.slot == rsma.slot && r.is_ok()
                    });
                    if let Some(sdma) = sdma {
                        paired += 1;
                        if rsma.num_scheduled > sdma.num_scheduled {
                            more += 1;
                        }
                    }
                }
                comparisons.push(Comparison {
                    snr_db: key.0,
                    i_value: key.1,
                    theta: key.2,
                    pct_rsma_more: 100.0 * more as f64 / num_realizations as f64,
                    paired,
                });
            }
        }
        Self {
            rows,
            cells,
            comparisons,
        }
    }

    pub fn cell(
        &self,
        mode: Mode,
        snr_db: f64,
        i_value: f64,
        theta: Option<f64>,
    ) -> Option<&CellSummary> {
        self.cells.iter().find(|c| {
            c.mode == mode && c.snr_db == snr_db && c.i_value == i_value && c.theta == theta
        })
    }

    pub fn num_failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }
}

/// Seeded starting state of realization `index`: timestamps per `v_mode`,
/// process values and estimates i.i.d. `N(0, 1)`. Also returns the decision
/// slot and the process stream for later draws.
pub fn initial_state(cfg: &ExperimentConfig, index: u64) -> (SemanticState, u64, GaussianStream) {
    let k = cfg.num_users;
    let v: Vec<u64> = match &cfg.v_mode {
        VMode::Zero => vec![0; k],
        VMode::Fixed(values) => values.clone(),
        VMode::Uniform(max) => {
            let mut s = GaussianStream::new(cfg.seed, Purpose::Timestamps, index);
            (0..k).map(|_| s.uniform_int(*max)).collect()
        }
    };
    let mut process = GaussianStream::new(cfg.seed, Purpose::Process, index);
    let mut estimate = GaussianStream::new(cfg.seed, Purpose::Estimate, index);
    let x = (0..k).map(|_| process.standard_normal()).collect();
    let x_hat = (0..k).map(|_| estimate.standard_normal()).collect();
    (
        SemanticState::new(x, x_hat, v),
        cfg.v_mode.max_value(),
        process,
    )
}

/// `w_k = f(t + 1) g(X_k, X_hat_k)`: the penalty user `k` incurs at the next
/// slot if it is left out at slot `t`.
pub fn slot_weights(
    aoii: &AoiiConfig,
    state: &SemanticState,
    t: u64,
) -> Result<Vec<f64>, CoreError> {
    (0..state.num_users())
        .map(|k| aoii.penalty(t + 1, state.v[k], state.x[k], state.x_hat[k]))
        .collect()
}

#[derive(Clone, Debug)]
struct Outcome {
    aoii: f64,
    scheduled: Vec<usize>,
    sca_iters: u32,
}

impl From<&ScheduleResult> for Outcome {
    fn from(r: &ScheduleResult) -> Self {
        Self {
            aoii: r.achieved_aoii,
            scheduled: r.scheduled.clone(),
            sca_iters: r.sca_iterations,
        }
    }
}

/// Callback invoked with every schedule a harness computes.
pub type Observer<'a> = &'a (dyn Fn(&SlotProblem, &ScheduleResult) + Sync);

/// Solves one slot in every configured mode. A zero power budget schedules
/// nobody without calling the optimizer.
fn solve_modes(
    cfg: &ExperimentConfig,
    channels: ChannelSet,
    i_value: f64,
    weights: Vec<f64>,
    power: f64,
    observer: Option<Observer>,
) -> Vec<(Mode, Result<Outcome, String>)> {
    if power == 0.0 {
        let idle = Outcome {
            aoii: weights.iter().fold(0.0, |a, w| a + w),
            scheduled: Vec::new(),
            sca_iters: 0,
        };
        return cfg.modes.iter().map(|&m| (m, Ok(idle.clone()))).collect();
    }
    let k = channels.num_users();
    let problem = match SlotProblem::new(channels, vec![i_value; k], weights, power) {
        Ok(p) => p,
        Err(e) => return cfg.modes.iter().map(|&m| (m, Err(e.to_string()))).collect(),
    };
    let with_mode = |mode| OptimizerConfig {
        mode,
        ..cfg.optimizer.clone()
    };
    let wants = |m| cfg.modes.contains(&m);
    let seen = |r: &ScheduleResult| {
        if let Some(f) = observer {
            f(&problem, r);
        }
        Outcome::from(r)
    };
    let (rsma, sdma) = if wants(Mode::Rsma) && cfg.rsma_warm_start {
        match solve_both(&problem, &cfg.optimizer) {
            Ok((s, r)) => (Some(Ok(seen(&r))), Some(Ok(seen(&s)))),
            Err(e) => (Some(Err(e.to_string())), Some(Err(e.to_string()))),
        }
    } else {
        let run = |m| {
            wants(m).then(|| {
                sca_solve(&problem, &with_mode(m))
                    .map(|r| seen(&r))
                    .map_err(|e| e.to_string())
            })
        };
        (run(Mode::Rsma), run(Mode::Sdma))
    };
    cfg.modes
        .iter()
        .map(|&m| {
            let r = match m {
                Mode::Rsma => rsma.clone(),
                Mode::Sdma => sdma.clone(),
            };
            (m, r.expect("requested mode was solved"))
        })
        .collect()
}

fn channels_for(
    cfg: &ExperimentConfig,
    theta: Option<f64>,
    index: u64,
) -> Result<ChannelSet, CoreError> {
    match (cfg.scenario, theta) {
        (Scenario::Geometric, Some(theta)) => geometric_pair(cfg.num_antennas, theta),
        (Scenario::Geometric, None) => Err(CoreError::InvalidConfig(
            "geometric scenario needs theta".into(),
        )),
        (Scenario::Rayleigh, _) => {
            rayleigh_stream(cfg.num_antennas, cfg.num_users, cfg.seed, index)
        }
    }
}

#[derive(Clone, Copy)]
struct Cell {
    theta: Option<f64>,
    snr_db: f64,
    i_value: f64,
    realization: u64,
}

fn run_cell(
    cfg: &ExperimentConfig,
    cell: Cell,
    observer: Option<Observer>,
) -> Result<Vec<MetricsRow>, CoreError> {
    let channels = channels_for(cfg, cell.theta, cell.realization)?;
    let (state, t, _) = initial_state(cfg, cell.realization);
    let weights = slot_weights(&cfg.aoii, &state, t)?;
    let power = cfg.total_power(cell.snr_db);
    let rows = solve_modes(cfg, channels, cell.i_value, weights, power, observer)
        .into_iter()
        .map(|(mode, outcome)| row(cfg, cell, mode, outcome, None, None))
        .collect();
    Ok(rows)
}

fn row(
    cfg: &ExperimentConfig,
    cell: Cell,
    mode: Mode,
    outcome: Result<Outcome, String>,
    slot: Option<u64>,
    cumulative: Option<f64>,
) -> MetricsRow {
    let (aoii, num_scheduled, sca_iters, error) = match outcome {
        Ok(o) => (
            Some(o.aoii),
            Some(o.scheduled.len()),
            Some(o.sca_iters),
            None,
        ),
        Err(e) => (None, None, None, Some(e)),
    };
    MetricsRow {
        scenario: cfg.scenario,
        mode,
        snr_db: cell.snr_db,
        i_value: cell.i_value,
        realization: cell.realization,
        v_mode: cfg.v_mode.to_string(),
        theta: cell.theta,
        slot,
        aoii,
        cumulative_aoii: cumulative,
        num_scheduled,
        sca_iters,
        error,
    }
}

fn grid(cfg: &ExperimentConfig, thetas: &[Option<f64>], realizations: u64) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &theta in thetas {
        for &snr_db in &cfg.snr_db {
            for &i_value in &cfg.i_values {
                for realization in 0..realizations {
                    cells.push(Cell {
                        theta,
                        snr_db,
                        i_value,
                        realization,
                    });
                }
            }
        }
    }
    cells
}

fn run_grid(
    cfg: &ExperimentConfig,
    cells: Vec<Cell>,
    observer: Option<Observer>,
) -> Result<Vec<MetricsRow>, CoreError> {
    let nested: Vec<Vec<MetricsRow>> = cells
        .into_par_iter()
        .map(|cell| run_cell(cfg, cell, observer))
        .collect::<Result<_, _>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Number of users scheduled by each mode across the `theta x snr x I` grid
/// of the geometric pair. Weights come from realization 0 of the seeded
/// semantic state and are shared by every cell.
pub fn sweep_scheduled_users(cfg: &ExperimentConfig) -> Result<MetricsRecord, CoreError> {
    sweep_scheduled_users_observed(cfg, None)
}

/// [`sweep_scheduled_users`] reporting every schedule to `observer`.
pub fn sweep_scheduled_users_observed(
    cfg: &ExperimentConfig,
    observer: Option<Observer>,
) -> Result<MetricsRecord, CoreError> {
    cfg.validate()?;
    if cfg.scenario != Scenario::Geometric {
        return Err(CoreError::InvalidConfig(
            "sweep-users needs the geometric scenario".into(),
        ));
    }
    let thetas: Vec<Option<f64>> = cfg.thetas().into_iter().map(Some).collect();
    let rows = run_grid(cfg, grid(cfg, &thetas, 1), observer)?;
    Ok(MetricsRecord::from_rows(rows, &cfg.modes, 1))
}

/// Paired Monte Carlo over `num_realizations` independent draws of channel
/// and semantic state; realization `r` uses stream `r` of every source.
/// Failed solves are kept as rows with an error and excluded from averages.
pub fn monte_carlo_aoii(cfg: &ExperimentConfig) -> Result<MetricsRecord, CoreError> {
    monte_carlo_aoii_observed(cfg, None)
}

/// [`monte_carlo_aoii`] reporting every schedule to `observer`.
pub fn monte_carlo_aoii_observed(
    cfg: &ExperimentConfig,
    observer: Option<Observer>,
) -> Result<MetricsRecord, CoreError> {
    cfg.validate()?;
    let thetas: Vec<Option<f64>> = match cfg.scenario {
        Scenario::Geometric => cfg.thetas().into_iter().map(Some).collect(),
        Scenario::Rayleigh => vec![None],
    };
    let rows = run_grid(
        cfg,
        grid(cfg, &thetas, cfg.num_realizations as u64),
        observer,
    )?;
    Ok(MetricsRecord::from_rows(
        rows,
        &cfg.modes,
        cfg.num_realizations,
    ))
}

/// Closed-loop run over `cfg.slots` slots for every `snr x I` cell and mode.
/// Each slot draws a fresh channel, schedules, acknowledges the successful
/// users and advances the process. Row `aoii` is the penalty left for the
/// next slot; `cumulative_aoii` is its running sum.
pub fn run_trajectory(cfg: &ExperimentConfig) -> Result<MetricsRecord, CoreError> {
    cfg.validate()?;
    let theta = cfg.thetas().first().copied();
    let mut jobs = Vec::new();
    for &snr_db in &cfg.snr_db {
        for &i_value in &cfg.i_values {
            for &mode in &cfg.modes {
                jobs.push((snr_db, i_value, mode));
            }
        }
    }
    let nested: Vec<Vec<MetricsRow>> = jobs
        .into_par_iter()
        .map(|(snr_db, i_value, mode)| trajectory(cfg, theta, snr_db, i_value, mode))
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<MetricsRow> = nested.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.snr_db, a.i_value, a.slot)
            .partial_cmp(&(b.snr_db, b.i_value, b.slot))
            .expect("finite keys")
            .then(
                cfg.modes
                    .iter()
                    .position(|&m| m == a.mode)
                    .cmp(&cfg.modes.iter().position(|&m| m == b.mode)),
            )
    });
    Ok(MetricsRecord::from_rows(
        rows,
        &cfg.modes,
        cfg.slots as usize,
    ))
}

fn trajectory(
    cfg: &ExperimentConfig,
    theta: Option<f64>,
    snr_db: f64,
    i_value: f64,
    mode: Mode,
) -> Result<Vec<MetricsRow>, CoreError> {
    let single = ExperimentConfig {
        modes: vec![mode],
        ..cfg.clone()
    };
    let (mut state, t0, mut process) = initial_state(cfg, 0);
    let power = cfg.total_power(snr_db);
    let mut cumulative = 0.0;
    let mut rows = Vec::with_capacity(cfg.slots as usize);
    for slot in 0..cfg.slots {
        let t = t0 + slot;
        let channels = channels_for(cfg, theta, slot)?;
        let weights = slot_weights(&cfg.aoii, &state, t)?;
        let (_, outcome) = solve_modes(&single, channels, i_value, weights, power, None)
            .pop()
            .expect("one mode");
        let outcome =
            outcome.map_err(|e| CoreError::InvalidProblem(format!("slot {slot}: {e}")))?;
        cumulative += outcome.aoii;
        state = step_process(&apply_ack(&state, &outcome.scheduled, t), &mut process);
        let cell = Cell {
            theta,
            snr_db,
            i_value,
            realization: 0,
        };
        rows.push(row(
            cfg,
            cell,
            mode,
            Ok(outcome),
            Some(slot),
            Some(cumulative),
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn weights_use_next_slot_age() {
        let aoii = AoiiConfig::default();
        let s = SemanticState::new(vec![1.0, 0.0], vec![0.0, 0.0], vec![2, 0]);
        assert_eq!(slot_weights(&aoii, &s, 3).unwrap(), vec![2.0, 0.0]);
        assert!(slot_weights(&aoii, &s, 0).is_err());
    }

    #[test]
    fn initial_state_is_seeded() {
        let c = cfg(r#"{"scenario": "rayleigh", "N": 2, "K": 3, "snr_db": [10],
            "I_values": [1], "seed": 5, "v_mode": {"uniform": 4}}"#);
        let (a, t, _) = initial_state(&c, 2);
        let (b, _, _) = initial_state(&c, 2);
        let (d, _, _) = initial_state(&c, 3);
        assert_eq!(a, b);
        assert_ne!(a, d);
        assert_eq!(t, 4);
        assert!(a.v.iter().all(|&v| v <= 4));
    }

    #[test]
    fn zero_power_schedules_nobody() {
        let c = cfg(r#"{"scenario": "rayleigh", "N": 2, "K": 2, "snr_db": [10],
            "I_values": [1], "seed": 5, "num_realizations": 3, "total_power_override": 0}"#);
        let m = monte_carlo_aoii(&c).unwrap();
        assert_eq!(m.rows.len(), 6);
        for r in &m.rows {
            assert_eq!(r.num_scheduled, Some(0));
            assert!(r.aoii.unwrap() > 0.0);
        }
        assert_eq!(m.comparisons[0].pct_rsma_more, 0.0);
    }

    #[test]
    fn summary_counts_failures() {
        let base = |mode, realization, n: Option<usize>| MetricsRow {
            scenario: Scenario::Rayleigh,
            mode,
            snr_db: 10.0,
            i_value: 1.0,
            realization,
            v_mode: "zero".into(),
            theta: None,
            slot: None,
            aoii: n.map(|n| n as f64),
            cumulative_aoii: None,
            num_scheduled: n,
            sca_iters: n.map(|_| 3),
            error: n.is_none().then(|| "boom".to_string()),
        };
        let rows = vec![
            base(Mode::Rsma, 0, Some(2)),
            base(Mode::Sdma, 0, Some(1)),
            base(Mode::Rsma, 1, None),
            base(Mode::Sdma, 1, Some(1)),
        ];
        let m = MetricsRecord::from_rows(rows, &[Mode::Rsma, Mode::Sdma], 2);
        let r = m.cell(Mode::Rsma, 10.0, 1.0, None).unwrap();
        assert_eq!((r.num_ok, r.num_failed), (1, 1));
        assert_eq!(r.mean_scheduled, Some(2.0));
        assert_eq!(m.comparisons[0].pct_rsma_more, 50.0);
        assert_eq!(m.comparisons[0].paired, 1);
        assert_eq!(m.num_failed(), 1);
    }
}
