use serde::{Deserialize, Serialize};

use crate::rng::GaussianStream;

/// Per-user semantic process values, receiver estimates and timestamps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemanticState {
    /// Current process value `X`.
    pub x: Vec<f64>,
    /// Receiver estimate `X_hat`.
    pub x_hat: Vec<f64>,
    /// Last slot at which the receiver was accurate.
    pub v: Vec<u64>,
    /// Slot of the last successful packet.
    pub u: Vec<u64>,
}

impl SemanticState {
    pub fn new(x: Vec<f64>, x_hat: Vec<f64>, v: Vec<u64>) -> Self {
        let u = v.clone();
        Self { x, x_hat, v, u }
    }

    pub fn num_users(&self) -> usize {
        self.x.len()
    }
}

/// Draws the next process value of every user i.i.d. `N(0, 1)`; estimates
/// and timestamps are untouched.
pub fn step_process(state: &SemanticState, stream: &mut GaussianStream) -> SemanticState {
    SemanticState {
        x: (0..state.num_users())
            .map(|_| stream.standard_normal())
            .collect(),
        ..state.clone()
    }
}

/// Records an ACK at slot `t` for every user in `successful`: the estimate
/// becomes `X_t`, `U = t` and `V = t + 1`.
pub fn apply_ack(state: &SemanticState, successful: &[usize], t: u64) -> SemanticState {
    let mut next = state.clone();
    for &k in successful {
        next.u[k] = t;
        next.x_hat[k] = state.x[k];
        next.v[k] = t + 1;
    }
    next
}
