//! Semantic-aware scheduling over rate-splitting multiple access.

pub mod channel;
pub mod error;
pub mod model;
pub mod optimizer;
pub mod rng;
pub mod sim;

pub use error::CoreError;
