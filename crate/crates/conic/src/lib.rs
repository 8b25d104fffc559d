//! Conic programs with linear, second-order-cone and exponential-cone
//! blocks, the cone encodings used by the scheduling optimizer, an
//! interior-point [`solve`] and an independent feasibility [`audit`].

pub mod audit;
pub mod encode;
pub mod error;
pub mod program;
pub mod solve;

pub use audit::{audit, AuditReport};
pub use encode::{
    encode_interference_bound, encode_log_lower, inner_product_forms, StackedComplex,
};
pub use error::ConicError;
pub use program::{AffineExpr, ConicProgram, ExpBlock, LinearRow, SocBlock};
pub use solve::{solve, ConicSolution, ConicStatus, SolveOptions, DEFAULT_MAX_ITER, DEFAULT_TOL};
