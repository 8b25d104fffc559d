use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rsma_core::sim::{CellSummary, Comparison, MetricsRow};
use serde::Serialize;

use crate::error::CliError;

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 13] = [
    "scenario",
    "mode",
    "snr_db",
    "I",
    "realization",
    "v_mode",
    "aoii",
    "num_scheduled",
    "sca_iters",
    "theta",
    "slot",
    "cumulative_aoii",
    "error",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `rows` as CSV preceded by a `# config_hash=... seed=...` line.
pub fn write_csv(path: &Path, hash: &str, seed: u64, rows: &[MetricsRow]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# config_hash={hash} seed={seed}").map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.scenario.to_string(),
            r.mode.to_string(),
            r.snr_db.to_string(),
            r.i_value.to_string(),
            r.realization.to_string(),
            r.v_mode.clone(),
            opt(r.aoii),
            opt(r.num_scheduled),
            opt(r.sca_iters),
            opt(r.theta),
            opt(r.slot),
            opt(r.cumulative_aoii),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub experiment: &'a str,
    pub config_hash: &'a str,
    pub seed: u64,
    pub num_rows: usize,
    pub num_failed: usize,
    pub cells: &'a [CellSummary],
    pub comparisons: &'a [Comparison],
}

#[derive(Debug, Serialize)]
pub struct CellTiming {
    pub snr_db: f64,
    #[serde(rename = "I")]
    pub i_value: f64,
    pub theta: Option<f64>,
    pub wall_clock_s: f64,
}

/// Provenance of one run. Unlike the CSV and summary it records wall-clock
/// times and so differs between reruns.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub artifact_version: &'a str,
    pub experiment: &'a str,
    pub config_hash: &'a str,
    pub seed: u64,
    pub outputs: Vec<PathBuf>,
    pub cells: Vec<CellTiming>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use rsma_core::optimizer::Mode;
    use rsma_core::sim::Scenario;

    use super::*;

    #[test]
    fn csv_layout() {
        let row = MetricsRow {
            scenario: Scenario::Rayleigh,
            mode: Mode::Rsma,
            snr_db: 20.0,
            i_value: 2.5,
            realization: 3,
            v_mode: "zero".into(),
            theta: None,
            slot: None,
            aoii: Some(0.125),
            cumulative_aoii: None,
            num_scheduled: Some(2),
            sca_iters: Some(4),
            error: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&path, "abc", 7, &[row]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# config_hash=abc seed=7");
        assert_eq!(lines[1], CSV_COLUMNS.join(","));
        assert_eq!(lines[2], "rayleigh,rsma,20,2.5,3,zero,0.125,2,4,,,,");
    }
}
