//! Joint scheduling, precoding and power allocation by big-M relaxation and
//! successive convex approximation.

mod config;
mod linearize;
mod sca;
mod schedule;
mod state;
mod subproblem;

pub use config::{big_m_bound, Mode, OptimizerConfig, SlotProblem};
pub use linearize::{LogTangent, ProductTangent, QuadOverLinTangent};
pub use sca::{
    sca_solve, sca_solve_from, sca_solve_warm, solve_both, Origin, ScheduleResult, Termination,
    TraceRecord,
};
pub use schedule::{evaluate, round_schedule, Evaluation};
pub use state::{initialize, warm_start, SCAState, INIT_COMMON_FRACTION, WARM_COMMON_FRACTION};
pub use subproblem::{assemble_subproblem, Layout, ProductRow, Subproblem, PRODUCT_SNAP};
