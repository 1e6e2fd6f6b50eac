use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A strictly increasing schedule of information fractions `t_1 < … < t_K = 1`.
///
/// The final entry is always exactly 1; interim entries lie in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationRates(Vec<f64>);

impl InformationRates {
    /// Validates and wraps a full schedule whose last entry must be 1
    /// (values within `1e-9` of 1 are snapped exactly).
    pub fn new(mut rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidSpec("rates must not be empty".into()));
        }
        let last = *rates.last().unwrap();
        if (last - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!(
                "final information rate must be 1, got {last}"
            )));
        }
        *rates.last_mut().unwrap() = 1.0;
        let mut prev = 0.0;
        for (i, &t) in rates.iter().enumerate() {
            if !t.is_finite() || t <= prev {
                return Err(Error::InvalidSpec(format!(
                    "rates not strictly increasing at index {i} (value {t})"
                )));
            }
            prev = t;
        }
        Ok(Self(rates))
    }

    /// Schedule from the interim fractions only; the final analysis at 1 is appended.
    pub fn from_interims(interims: &[f64]) -> Result<Self> {
        let mut v = interims.to_vec();
        v.push(1.0);
        Self::new(v)
    }

    /// The conventional equally spaced schedule `k/K`.
    pub fn equal_spacing(stages: usize) -> Self {
        let k = stages.max(1);
        Self((1..=k).map(|i| i as f64 / k as f64).collect())
    }

    /// Number of analyses K (interims plus final).
    pub fn stages(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// First information fraction `t_1`.
    pub fn first(&self) -> f64 {
        self.0[0]
    }

    /// Interim fractions `t_1 … t_{K-1}` (empty for a fixed design).
    pub fn interims(&self) -> &[f64] {
        &self.0[..self.0.len() - 1]
    }
}
