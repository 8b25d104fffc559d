//! Semantic-state dynamics and the experiment harnesses built on the optimizer.

mod config;
mod experiments;
mod process;

pub use config::{ExperimentConfig, Scenario, Theta, VMode};
pub use experiments::{
    initial_state, monte_carlo_aoii, monte_carlo_aoii_observed, run_trajectory, slot_weights,
    sweep_scheduled_users, sweep_scheduled_users_observed, CellSummary, Comparison, MetricsRecord,
    MetricsRow, Observer,
};
pub use process::{apply_ack, step_process, SemanticState};
