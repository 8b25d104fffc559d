//! Reproducible random streams.
//!
//! Every random quantity is drawn from a ChaCha20 generator keyed by the
//! experiment seed, with the 64-bit stream id selecting a
//! `(purpose, index)` pair. Streams with distinct ids are independent, so
//! realizations can run in any order or in parallel and still reproduce
//! bit-for-bit. Gaussians come from the Box-Muller transform on the
//! generator's uniform output.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{Rng, SeedableRng};

/// What a stream is used for. Occupies the top byte of the stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Channel = 1,
    Timestamps = 2,
    Process = 3,
    Estimate = 4,
}

const INDEX_BITS: u32 = 56;

/// Seeded Gaussian source over one ChaCha20 stream.
#[derive(Clone, Debug)]
pub struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, purpose: Purpose, index: u64) -> Self {
        assert!(index < 1 << INDEX_BITS, "stream index {index} too large");
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(((purpose as u64) << INDEX_BITS) | index);
        Self { rng, spare: None }
    }

    /// Uniform on `(0, 1]`, 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..=max`.
    pub fn uniform_int(&mut self, max: u64) -> u64 {
        if max == u64::MAX {
            return self.rng.next_u64();
        }
        let span = max + 1;
        // reject the lowest 2^64 mod span values so the rest split evenly
        let threshold = span.wrapping_neg() % span;
        loop {
            let v = self.rng.next_u64();
            if v >= threshold {
                return v % span;
            }
        }
    }

    /// Standard normal sample.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let (a, b) = self.box_muller();
        self.spare = Some(b);
        a
    }

    /// Circularly-symmetric complex Gaussian with unit variance
    /// (variance 1/2 per component).
    pub fn complex_normal(&mut self) -> Complex64 {
        let (a, b) = self.box_muller();
        Complex64::new(a * FRAC_1_SQRT_2, b * FRAC_1_SQRT_2)
    }

    fn box_muller(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        (r * c, r * s)
    }
}
