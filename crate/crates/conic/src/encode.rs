//! Cone encodings for rate and interference constraints over complex
//! precoders embedded as stacked real variables.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::error::ConicError;
use crate::program::{AffineExpr, ConicProgram};

/// A complex `len`-vector stored as `2 * len` real variables: real parts at
/// `offset..offset + len`, imaginary parts right after.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StackedComplex {
    pub offset: usize,
    pub len: usize,
}

impl StackedComplex {
    pub fn new(offset: usize, len: usize) -> Self {
        Self { offset, len }
    }

    pub fn re(&self, n: usize) -> usize {
        self.offset + n
    }

    pub fn im(&self, n: usize) -> usize {
        self.offset + self.len + n
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + 2 * self.len
    }

    /// Reads the complex vector back out of a real solution vector.
    pub fn read(&self, x: &[f64]) -> Vec<Complex64> {
        (0..self.len)
            .map(|n| Complex64::new(x[self.re(n)], x[self.im(n)]))
            .collect()
    }

    fn check(&self, num_vars: usize) -> Result<(), ConicError> {
        let end = self.offset + 2 * self.len;
        if self.len > 0 && end > num_vars {
            return Err(ConicError::IndexOutOfRange {
                index: end - 1,
                num_vars,
            });
        }
        Ok(())
    }
}

/// Real and imaginary parts of `h^H p` as affine forms in the stacked
/// variables of `p`.
pub fn inner_product_forms(h: &[Complex64], p: StackedComplex) -> (AffineExpr, AffineExpr) {
    debug_assert_eq!(h.len(), p.len);
    let mut re = AffineExpr::default();
    let mut im = AffineExpr::default();
    // conj(a + jb) (x + jy) = (ax + by) + j(ay - bx)
    for (n, hn) in h.iter().enumerate() {
        re.add_term(p.re(n), hn.re);
        re.add_term(p.im(n), hn.im);
        im.add_term(p.im(n), hn.re);
        im.add_term(p.re(n), -hn.im);
    }
    (re.compacted(), im.compacted())
}

fn check_index(program: &ConicProgram, index: usize) -> Result<(), ConicError> {
    if index >= program.num_vars {
        return Err(ConicError::IndexOutOfRange {
            index,
            num_vars: program.num_vars,
        });
    }
    Ok(())
}

/// Makes `t <= log2(1 + x)` enforceable: adds an auxiliary `u` with
/// `(1 + x, 1, u)` in the exponential cone, i.e. `u <= ln(1 + x)`, and the
/// tie `u = ln(2) * t`. Returns the index of `u`.
pub fn encode_log_lower(
    program: &mut ConicProgram,
    x: usize,
    t: usize,
) -> Result<usize, ConicError> {
    check_index(program, x)?;
    check_index(program, t)?;
    let u = program.add_var();
    program.add_exp(
        AffineExpr::var(x).with_constant(1.0),
        AffineExpr::constant(1.0),
        AffineExpr::var(u),
    );
    program.add_eq_zero(AffineExpr::var(u).with_term(t, -LN_2));
    Ok(u)
}

/// Adds `1 + sum_i |h^H p_i|^2 <= sigma` as a rotated second-order cone:
/// with `r` the stacked real/imaginary parts of every `h^H p_i`,
/// `||(2 r, sigma - 2)|| <= sigma` is equivalent to `||r||^2 <= sigma - 1`.
pub fn encode_interference_bound(
    program: &mut ConicProgram,
    h: &[Complex64],
    precoders: &[StackedComplex],
    sigma: usize,
) -> Result<(), ConicError> {
    check_index(program, sigma)?;
    let mut entries = Vec::with_capacity(2 * precoders.len() + 1);
    for p in precoders {
        if p.len != h.len() {
            return Err(ConicError::Backend(format!(
                "precoder length {} does not match channel length {}",
                p.len,
                h.len()
            )));
        }
        p.check(program.num_vars)?;
        let (re, im) = inner_product_forms(h, *p);
        entries.push(re.scaled(2.0));
        entries.push(im.scaled(2.0));
    }
    entries.push(AffineExpr::var(sigma).with_constant(-2.0));
    program.add_soc(AffineExpr::var(sigma), entries);
    Ok(())
}
