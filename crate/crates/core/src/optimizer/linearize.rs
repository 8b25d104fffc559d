//! First-order expansions used to convexify the rate constraints.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rsma_conic::{inner_product_forms, AffineExpr, StackedComplex};

use crate::channel::inner;

/// Tangent of the concave `log2(1 + beta)` at `beta0`; an upper bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogTangent {
    pub point: f64,
}

impl LogTangent {
    pub fn new(point: f64) -> Self {
        Self { point }
    }

    pub fn exact(beta: f64) -> f64 {
        (1.0 + beta).log2()
    }

    pub fn slope(&self) -> f64 {
        1.0 / ((1.0 + self.point) * LN_2)
    }

    pub fn value(&self, beta: f64) -> f64 {
        Self::exact(self.point) + (beta - self.point) * self.slope()
    }

    /// The tangent as an affine form in the variable `beta`.
    pub fn expr(&self, beta: usize) -> AffineExpr {
        AffineExpr::term(beta, self.slope())
            .with_constant(Self::exact(self.point) - self.point * self.slope())
    }
}

/// Tangent of the jointly convex `|h^H p|^2 / sigma` at `(p0, sigma0)`:
/// `2 Re{conj(g0) h^H p} / sigma0 - |g0|^2 sigma / sigma0^2` with
/// `g0 = h^H p0`. A global lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadOverLinTangent {
    pub h: Vec<Complex64>,
    pub g0: Complex64,
    pub sigma0: f64,
}

impl QuadOverLinTangent {
    pub fn new(h: &[Complex64], p0: &[Complex64], sigma0: f64) -> Self {
        Self {
            h: h.to_vec(),
            g0: inner(h, p0),
            sigma0,
        }
    }

    pub fn exact(h: &[Complex64], p: &[Complex64], sigma: f64) -> f64 {
        inner(h, p).norm_sqr() / sigma
    }

    pub fn value(&self, p: &[Complex64], sigma: f64) -> f64 {
        let g = inner(&self.h, p);
        2.0 * (self.g0.conj() * g).re / self.sigma0
            - self.g0.norm_sqr() * sigma / (self.sigma0 * self.sigma0)
    }

    /// Gradient with respect to `(Re p, Im p, sigma)`.
    pub fn gradient(&self) -> (Vec<f64>, Vec<f64>, f64) {
        let scale = 2.0 / self.sigma0;
        let (d_re, d_im) = self
            .h
            .iter()
            .map(|hn| {
                let a = (self.g0 * hn).conj();
                (scale * a.re, -scale * a.im)
            })
            .unzip();
        (
            d_re,
            d_im,
            -self.g0.norm_sqr() / (self.sigma0 * self.sigma0),
        )
    }

    /// The tangent as an affine form in stacked precoder variables and `sigma`.
    pub fn expr(&self, p: StackedComplex, sigma: usize) -> AffineExpr {
        let (re, im) = inner_product_forms(&self.h, p);
        let scale = 2.0 / self.sigma0;
        re.scaled(scale * self.g0.re)
            .plus(&im.scaled(scale * self.g0.im))
            .with_term(sigma, -self.g0.norm_sqr() / (self.sigma0 * self.sigma0))
            .compacted()
    }
}

/// Expansion of `prod_k z_k` at `z0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTangent {
    pub point: Vec<f64>,
}

impl ProductTangent {
    pub fn new(point: &[f64]) -> Self {
        Self {
            point: point.to_vec(),
        }
    }

    pub fn exact(z: &[f64]) -> f64 {
        z.iter().product()
    }

    /// `prod_{l != k} z0_l` for every `k`.
    pub fn coefficients(&self) -> Vec<f64> {
        (0..self.point.len())
            .map(|k| {
                self.point
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != k)
                    .map(|(_, v)| v)
                    .product()
            })
            .collect()
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        let base = Self::exact(&self.point);
        base + self
            .coefficients()
            .iter()
            .zip(z.iter().zip(&self.point))
            .map(|(c, (zk, z0))| c * (zk - z0))
            .sum::<f64>()
    }

    /// Number of zero entries in the expansion point; with two or more the
    /// expansion is identically zero.
    pub fn zero_count(&self) -> usize {
        self.point.iter().filter(|&&v| v == 0.0).count()
    }
}
