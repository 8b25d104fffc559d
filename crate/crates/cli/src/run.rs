use std::path::{Path, PathBuf};
use std::time::Instant;

use rsma_core::sim::{
    monte_carlo_aoii, run_trajectory, sweep_scheduled_users, ExperimentConfig, MetricsRecord, Theta,
};

use crate::config::config_hash;
use crate::error::CliError;
use crate::output::{write_csv, write_json, CellTiming, RunManifest, Summary};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    SweepUsers,
    MonteCarlo,
    Trajectory,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SweepUsers => "sweep-users",
            Experiment::MonteCarlo => "monte-carlo",
            Experiment::Trajectory => "trajectory",
        }
    }

    fn csv_name(self) -> &'static str {
        match self {
            Experiment::SweepUsers => "scheduled_users.csv",
            Experiment::MonteCarlo => "monte_carlo.csv",
            Experiment::Trajectory => "trajectory.csv",
        }
    }

    fn execute(self, cfg: &ExperimentConfig) -> Result<MetricsRecord, CliError> {
        Ok(match self {
            Experiment::SweepUsers => sweep_scheduled_users(cfg)?,
            Experiment::MonteCarlo => monte_carlo_aoii(cfg)?,
            Experiment::Trajectory => run_trajectory(cfg)?,
        })
    }
}

/// Outcome of a finished run.
#[derive(Debug)]
pub struct RunReport {
    pub config_hash: String,
    pub num_rows: usize,
    pub num_failed: usize,
    pub outputs: Vec<PathBuf>,
}

/// Splits the configured grid into single `(theta, snr, I)` cells. Seeds
/// depend only on realization indices, so per-cell runs reproduce the full
/// grid exactly.
fn cells(cfg: &ExperimentConfig, experiment: Experiment) -> Vec<ExperimentConfig> {
    let thetas: Vec<Option<f64>> = match experiment {
        Experiment::Trajectory => vec![cfg.thetas().first().copied()],
        _ if cfg.theta.is_some() => cfg.thetas().into_iter().map(Some).collect(),
        _ => vec![None],
    };
    let mut out = Vec::new();
    for &theta in &thetas {
        for &snr in &cfg.snr_db {
            for &i in &cfg.i_values {
                out.push(ExperimentConfig {
                    theta: theta.map(Theta::One),
                    snr_db: vec![snr],
                    i_values: vec![i],
                    ..cfg.clone()
                });
            }
        }
    }
    out
}

pub fn run(
    experiment: Experiment,
    cfg: &ExperimentConfig,
    out_dir: &Path,
) -> Result<RunReport, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let hash = config_hash(cfg)?;
    let mut record = MetricsRecord::default();
    let mut timings = Vec::new();
    for cell in cells(cfg, experiment) {
        let start = Instant::now();
        let part = experiment.execute(&cell)?;
        timings.push(CellTiming {
            snr_db: cell.snr_db[0],
            i_value: cell.i_values[0],
            theta: cell.thetas().first().copied(),
            wall_clock_s: start.elapsed().as_secs_f64(),
        });
        record.rows.extend(part.rows);
        record.cells.extend(part.cells);
        record.comparisons.extend(part.comparisons);
    }

    let csv_path = out_dir.join(experiment.csv_name());
    let summary_path = out_dir.join("summary.json");
    let manifest_path = out_dir.join("manifest.json");
    write_csv(&csv_path, &hash, cfg.seed, &record.rows)?;
    let num_failed = record.num_failed();
    write_json(
        &summary_path,
        &Summary {
            experiment: experiment.name(),
            config_hash: &hash,
            seed: cfg.seed,
            num_rows: record.rows.len(),
            num_failed,
            cells: &record.cells,
            comparisons: &record.comparisons,
        },
    )?;
    let outputs = vec![csv_path, summary_path];
    write_json(
        &manifest_path,
        &RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION"),
            experiment: experiment.name(),
            config_hash: &hash,
            seed: cfg.seed,
            outputs: outputs.clone(),
            cells: timings,
        },
    )?;
    Ok(RunReport {
        config_hash: hash,
        num_rows: record.rows.len(),
        num_failed,
        outputs: outputs.into_iter().chain([manifest_path]).collect(),
    })
}
