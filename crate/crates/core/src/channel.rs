//! Channel generation.
//!
//! Channels are noise-normalized (unit noise power), so SNR enters only
//! through the transmit power budget.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::rng::{GaussianStream, Purpose};

/// `K` complex `N`-dimensional channel vectors `h_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    num_antennas: usize,
    vectors: Vec<Vec<Complex64>>,
}

impl ChannelSet {
    pub fn new(vectors: Vec<Vec<Complex64>>) -> Result<Self, CoreError> {
        let num_antennas = vectors.first().map(Vec::len).unwrap_or(0);
        if vectors.is_empty() || num_antennas == 0 {
            return Err(CoreError::InvalidDimensions(
                "channel set needs at least one user and one antenna".into(),
            ));
        }
        for (k, h) in vectors.iter().enumerate() {
            if h.len() != num_antennas {
                return Err(CoreError::InvalidDimensions(format!(
                    "user {k} has {} entries, expected {num_antennas}",
                    h.len()
                )));
            }
            if h.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(CoreError::InvalidDimensions(format!(
                    "user {k} has non-finite entries"
                )));
            }
            if channel_gain(h) == 0.0 {
                return Err(CoreError::InvalidDimensions(format!(
                    "user {k} has an all-zero channel"
                )));
            }
        }
        Ok(Self {
            num_antennas,
            vectors,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_users(&self) -> usize {
        self.vectors.len()
    }

    pub fn user(&self, k: usize) -> &[Complex64] {
        &self.vectors[k]
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn gains(&self) -> Vec<f64> {
        self.vectors.iter().map(|h| channel_gain(h)).collect()
    }

    pub fn max_gain(&self) -> f64 {
        self.gains().into_iter().fold(0.0, f64::max)
    }

    /// JSON form: one array per user of `[re, im]` pairs.
    pub fn to_json(&self) -> Result<String, CoreError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, CoreError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CoreError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CoreError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Serialize for ChannelSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Vec<[f64; 2]>> = self
            .vectors
            .iter()
            .map(|h| h.iter().map(|v| [v.re, v.im]).collect())
            .collect();
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChannelSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        ChannelSet::new(
            raw.into_iter()
                .map(|h| {
                    h.into_iter()
                        .map(|[re, im]| Complex64::new(re, im))
                        .collect()
                })
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Two-user uniform-linear-array pair: `h_1 = [1, ..., 1]` and
/// `h_2[n] = e^{j n theta}`.
pub fn geometric_pair(num_antennas: usize, theta: f64) -> Result<ChannelSet, CoreError> {
    if num_antennas == 0 {
        return Err(CoreError::InvalidDimensions(
            "geometric pair needs N >= 1".into(),
        ));
    }
    if !theta.is_finite() {
        return Err(CoreError::InvalidDimensions("theta must be finite".into()));
    }
    let h1 = vec![Complex64::new(1.0, 0.0); num_antennas];
    let h2 = (0..num_antennas)
        .map(|n| Complex64::from_polar(1.0, n as f64 * theta))
        .collect();
    ChannelSet::new(vec![h1, h2])
}

/// I.i.d. `CN(0, 1)` entries; a pure function of `(N, K, seed)`.
pub fn rayleigh(num_antennas: usize, num_users: usize, seed: u64) -> Result<ChannelSet, CoreError> {
    rayleigh_stream(num_antennas, num_users, seed, 0)
}

/// Rayleigh draw from stream `index` of `seed`; used to give each Monte
/// Carlo realization or trajectory slot its own channel.
pub fn rayleigh_stream(
    num_antennas: usize,
    num_users: usize,
    seed: u64,
    index: u64,
) -> Result<ChannelSet, CoreError> {
    if num_antennas == 0 || num_users == 0 {
        return Err(CoreError::InvalidDimensions(
            "rayleigh needs N >= 1 and K >= 1".into(),
        ));
    }
    let mut stream = GaussianStream::new(seed, Purpose::Channel, index);
    let vectors = (0..num_users)
        .map(|_| loop {
            let h: Vec<Complex64> = (0..num_antennas).map(|_| stream.complex_normal()).collect();
            if channel_gain(&h) > 0.0 {
                break h;
            }
        })
        .collect();
    ChannelSet::new(vectors)
}

/// Squared Euclidean norm `||h||^2`.
pub fn channel_gain(h: &[Complex64]) -> f64 {
    h.iter().map(Complex64::norm_sqr).sum()
}

/// `h_a^H h_b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
