//! Raw-constraint feasibility audit.
//!
//! Re-evaluates every constraint of a [`ConicProgram`] directly at a point,
//! with no reference to solver slacks or duals. Violations are relative:
//! the absolute violation divided by `max(1, magnitude)` of the quantities
//! involved.

use serde::{Deserialize, Serialize};

use crate::program::{AffineExpr, ConicProgram, ExpBlock, LinearRow, SocBlock};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub max_eq: f64,
    pub max_ineq: f64,
    pub max_soc: f64,
    pub max_exp: f64,
}

impl AuditReport {
    pub fn worst(&self) -> f64 {
        self.max_eq
            .max(self.max_ineq)
            .max(self.max_soc)
            .max(self.max_exp)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

fn row_scale(row: &LinearRow, x: &[f64]) -> f64 {
    row.coeffs
        .iter()
        .map(|&(i, a)| (a * x[i]).abs())
        .fold(row.rhs.abs(), f64::max)
        .max(1.0)
}

fn eq_violation(row: &LinearRow, x: &[f64]) -> f64 {
    (row.lhs(x) - row.rhs).abs() / row_scale(row, x)
}

fn ineq_violation(row: &LinearRow, x: &[f64]) -> f64 {
    (row.lhs(x) - row.rhs).max(0.0) / row_scale(row, x)
}

fn soc_violation(block: &SocBlock, x: &[f64]) -> f64 {
    let bound = block.bound.eval(x);
    let norm = block
        .entries
        .iter()
        .map(|e| e.eval(x).powi(2))
        .sum::<f64>()
        .sqrt();
    (norm - bound).max(0.0) / bound.abs().max(norm).max(1.0)
}

fn exp_violation(block: &ExpBlock, x: &[f64]) -> f64 {
    let eval = |e: &AffineExpr| e.eval(x);
    let (x1, x2, x3) = (eval(&block.x1), eval(&block.x2), eval(&block.x3));
    let scale = x1.abs().max(x2.abs()).max(1.0);
    if x2 <= 0.0 {
        // closure: x2 = 0, x1 >= 0, x3 <= 0
        let v = (-x2).max(-x1).max(x3).max(0.0);
        return v / scale;
    }
    let ratio = x3 / x2;
    if ratio > 700.0 {
        return f64::INFINITY;
    }
    (x2 * ratio.exp() - x1).max(0.0) / scale
}

/// Audits `x` against every constraint block of `program`.
pub fn audit(program: &ConicProgram, x: &[f64]) -> AuditReport {
    assert_eq!(x.len(), program.num_vars, "point dimension mismatch");
    let fold = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    AuditReport {
        max_eq: fold(&mut program.linear_eq.iter().map(|r| eq_violation(r, x))),
        max_ineq: fold(&mut program.linear_ineq.iter().map(|r| ineq_violation(r, x))),
        max_soc: fold(&mut program.soc_blocks.iter().map(|b| soc_violation(b, x))),
        max_exp: fold(&mut program.exp_blocks.iter().map(|b| exp_violation(b, x))),
    }
}
