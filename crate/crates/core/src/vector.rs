//! Nonnegative vectors, the state space of every mapping in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite vector with nonnegative, finite entries and at least one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct NonnegVector(Vec<f64>);

impl NonnegVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = entries.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidEntry { index, value });
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self(vec![0.0; dim])
    }

    pub fn ones(dim: usize) -> Self {
        Self::constant(dim, 1.0)
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        assert!(dim > 0, "dimension must be positive");
        assert!(value.is_finite() && value >= 0.0);
        Self(vec![value; dim])
    }

    /// Wraps entries already known to satisfy the invariants.
    pub(crate) fn from_trusted(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        debug_assert!(entries.iter().all(|v| v.is_finite() && *v >= 0.0));
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.0)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|v| *v > 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor.is_finite() && factor >= 0.0);
        Self(self.0.iter().map(|v| v * factor).collect())
    }

    /// Coordinatewise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl std::ops::Index<usize> for NonnegVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for NonnegVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<NonnegVector> for Vec<f64> {
    fn from(v: NonnegVector) -> Self {
        v.0
    }
}

pub(crate) fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub(crate) fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
