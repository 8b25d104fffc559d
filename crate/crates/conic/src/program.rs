//! Conic program representation.
//!
//! A [`ConicProgram`] minimizes a linear objective `c^T x` over real
//! variables subject to four kinds of constraint blocks:
//!
//! * linear equalities `a^T x = b`,
//! * linear inequalities `a^T x <= b`,
//! * second-order cones `||u|| <= v` with `u`, `v` affine in `x`,
//! * exponential cones `x2 * exp(x3 / x2) <= x1, x2 > 0` with each entry
//!   affine in `x`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConicError;

/// Sparse affine form `sum_i coeff_i * x[index_i] + constant`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn constant(value: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn var(index: usize) -> Self {
        Self::term(index, 1.0)
    }

    pub fn term(index: usize, coeff: f64) -> Self {
        Self {
            terms: vec![(index, coeff)],
            constant: 0.0,
        }
    }

    pub fn with_term(mut self, index: usize, coeff: f64) -> Self {
        self.terms.push((index, coeff));
        self
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant += constant;
        self
    }

    pub fn add_term(&mut self, index: usize, coeff: f64) {
        self.terms.push((index, coeff));
    }

    /// Returns `scale * self`.
    pub fn scaled(&self, scale: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|&(i, a)| (i, a * scale)).collect(),
            constant: self.constant * scale,
        }
    }

    /// Returns `self + other`.
    pub fn plus(&self, other: &AffineExpr) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self {
            terms,
            constant: self.constant + other.constant,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, a)| a * x[i]).sum::<f64>() + self.constant
    }

    /// Largest absolute term `|a_i x_i|` together with `|constant|`; used to
    /// put residuals on a relative scale.
    pub fn magnitude(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(i, a)| (a * x[i]).abs())
            .fold(self.constant.abs(), f64::max)
    }

    /// Merges repeated indices and drops exact zeros. Terms come out sorted by
    /// index.
    pub fn compacted(&self) -> Self {
        let mut terms = self.terms.clone();
        terms.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (i, a) in terms {
            match merged.last_mut() {
                Some((j, b)) if *j == i => *b += a,
                _ => merged.push((i, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        Self {
            terms: merged,
            constant: self.constant,
        }
    }

    fn check(&self, num_vars: usize, context: &str) -> Result<(), ConicError> {
        if !self.constant.is_finite() {
            return Err(ConicError::NonFinite(context.to_string()));
        }
        for &(i, a) in &self.terms {
            if i >= num_vars {
                return Err(ConicError::IndexOutOfRange { index: i, num_vars });
            }
            if !a.is_finite() {
                return Err(ConicError::NonFinite(context.to_string()));
            }
        }
        Ok(())
    }
}

/// Linear row `coeffs^T x (= | <=) rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LinearRow {
    /// Row form of `expr (= | <=) 0`.
    pub fn from_expr(expr: &AffineExpr) -> Self {
        let expr = expr.compacted();
        Self {
            coeffs: expr.terms,
            rhs: -expr.constant,
        }
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, a)| a * x[i]).sum()
    }

    fn as_expr(&self) -> AffineExpr {
        AffineExpr {
            terms: self.coeffs.clone(),
            constant: -self.rhs,
        }
    }
}

/// `||entries|| <= bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SocBlock {
    pub bound: AffineExpr,
    pub entries: Vec<AffineExpr>,
}

/// `(x1, x2, x3)` in the exponential cone: `x2 * exp(x3 / x2) <= x1`, `x2 > 0`
/// (closure included).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpBlock {
    pub x1: AffineExpr,
    pub x2: AffineExpr,
    pub x3: AffineExpr,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    pub num_vars: usize,
    /// Minimized as `objective^T x`.
    pub objective: Vec<f64>,
    pub linear_eq: Vec<LinearRow>,
    pub linear_ineq: Vec<LinearRow>,
    pub soc_blocks: Vec<SocBlock>,
    pub exp_blocks: Vec<ExpBlock>,
}

impl ConicProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            ..Self::default()
        }
    }

    /// Appends one variable with zero objective weight and returns its index.
    pub fn add_var(&mut self) -> usize {
        self.num_vars += 1;
        self.objective.push(0.0);
        self.num_vars - 1
    }

    /// Appends `count` contiguous variables and returns the first index.
    pub fn add_vars(&mut self, count: usize) -> usize {
        let first = self.num_vars;
        self.num_vars += count;
        self.objective.resize(self.num_vars, 0.0);
        first
    }

    pub fn set_objective(&mut self, index: usize, coeff: f64) {
        self.objective[index] = coeff;
    }

    /// `expr = 0`.
    pub fn add_eq_zero(&mut self, expr: AffineExpr) {
        self.linear_eq.push(LinearRow::from_expr(&expr));
    }

    /// `expr <= 0`.
    pub fn add_le_zero(&mut self, expr: AffineExpr) {
        self.linear_ineq.push(LinearRow::from_expr(&expr));
    }

    /// `lhs <= rhs`.
    pub fn add_le(&mut self, lhs: AffineExpr, rhs: AffineExpr) {
        self.add_le_zero(lhs.plus(&rhs.scaled(-1.0)));
    }

    pub fn add_lower_bound(&mut self, index: usize, lower: f64) {
        self.linear_ineq.push(LinearRow {
            coeffs: vec![(index, -1.0)],
            rhs: -lower,
        });
    }

    pub fn add_upper_bound(&mut self, index: usize, upper: f64) {
        self.linear_ineq.push(LinearRow {
            coeffs: vec![(index, 1.0)],
            rhs: upper,
        });
    }

    pub fn fix(&mut self, index: usize, value: f64) {
        self.linear_eq.push(LinearRow {
            coeffs: vec![(index, 1.0)],
            rhs: value,
        });
    }

    pub fn add_soc(&mut self, bound: AffineExpr, entries: Vec<AffineExpr>) {
        self.soc_blocks.push(SocBlock { bound, entries });
    }

    pub fn add_exp(&mut self, x1: AffineExpr, x2: AffineExpr, x3: AffineExpr) {
        self.exp_blocks.push(ExpBlock { x1, x2, x3 });
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        if self.objective.len() != self.num_vars {
            return Err(ConicError::ObjectiveLength {
                expected: self.num_vars,
                found: self.objective.len(),
            });
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(ConicError::NonFinite("objective".into()));
        }
        let n = self.num_vars;
        for row in &self.linear_eq {
            row.as_expr().check(n, "equality row")?;
        }
        for row in &self.linear_ineq {
            row.as_expr().check(n, "inequality row")?;
        }
        for block in &self.soc_blocks {
            block.bound.check(n, "soc bound")?;
            for e in &block.entries {
                e.check(n, "soc entry")?;
            }
        }
        for block in &self.exp_blocks {
            block.x1.check(n, "exp x1")?;
            block.x2.check(n, "exp x2")?;
            block.x3.check(n, "exp x3")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, ConicError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ConicError> {
        let program: Self = serde_json::from_str(text)?;
        program.validate()?;
        Ok(program)
    }

    /// Writes a debug dump that [`ConicProgram::load`] reads back exactly.
    pub fn dump(&self, path: impl AsRef<Path>) -> Result<(), ConicError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConicError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compacted_merges_duplicates() {
        let e = AffineExpr::term(3, 1.0)
            .with_term(1, 2.0)
            .with_term(3, -1.0)
            .with_term(1, 0.5);
        assert_eq!(e.compacted().terms, vec![(1, 2.5)]);
    }

    #[test]
    fn validate_rejects_bad_index() {
        let mut p = ConicProgram::new(2);
        p.add_upper_bound(2, 1.0);
        assert!(matches!(
            p.validate(),
            Err(ConicError::IndexOutOfRange {
                index: 2,
                num_vars: 2
            })
        ));
    }

    #[test]
    fn validate_rejects_non_finite() {
        let mut p = ConicProgram::new(1);
        p.add_le_zero(AffineExpr::term(0, f64::NAN));
        assert!(matches!(p.validate(), Err(ConicError::NonFinite(_))));

        let mut p = ConicProgram::new(1);
        p.objective[0] = f64::INFINITY;
        assert!(p.validate().is_err());
    }

    #[test]
    fn validate_rejects_objective_length() {
        let mut p = ConicProgram::new(2);
        p.objective.pop();
        assert!(matches!(
            p.validate(),
            Err(ConicError::ObjectiveLength { .. })
        ));
    }

    #[test]
    fn le_row_moves_constant_to_rhs() {
        let mut p = ConicProgram::new(1);
        p.add_le(
            AffineExpr::var(0).with_constant(2.0),
            AffineExpr::constant(5.0),
        );
        assert_eq!(p.linear_ineq[0].coeffs, vec![(0, 1.0)]);
        assert_eq!(p.linear_ineq[0].rhs, 3.0);
    }
}
