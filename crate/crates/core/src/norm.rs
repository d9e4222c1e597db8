//! Monotone norms on the nonnegative orthant.
//!
//! Every norm here satisfies `0 <= x <= y  =>  ||x|| <= ||y||`. A positive
//! `scale` multiplies the base value, so the budget-scaled norm
//! `||v||_a / budget` of the canonical problem is `norm_a.scaled(1.0 / budget)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::NonnegVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L1,
    LInf,
    WeightedL1,
    WeightedLInf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneNorm {
    kind: NormKind,
    weights: Option<Vec<f64>>,
    scale: f64,
}

impl MonotoneNorm {
    pub fn l1() -> Self {
        Self { kind: NormKind::L1, weights: None, scale: 1.0 }
    }

    pub fn linf() -> Self {
        Self { kind: NormKind::LInf, weights: None, scale: 1.0 }
    }

    pub fn weighted_l1(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Self { kind: NormKind::WeightedL1, weights: Some(weights), scale: 1.0 })
    }

    pub fn weighted_linf(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Self { kind: NormKind::WeightedLInf, weights: Some(weights), scale: 1.0 })
    }

    /// Multiplies the current scale by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let scale = self.scale * factor;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidNorm(format!("scale must be positive and finite, got {scale}")));
        }
        Ok(Self { scale, ..self.clone() })
    }

    /// The norm `||v|| / budget`.
    pub fn for_budget(&self, budget: f64) -> Result<Self> {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::InvalidConfig(format!("budget must be positive, got {budget}")));
        }
        self.scaled(1.0 / budget)
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Checked evaluation: the weight vector (if any) must match `x`.
    pub fn eval(&self, x: &NonnegVector) -> Result<f64> {
        self.check_dim(x.dim())?;
        Ok(self.value(x.as_slice()))
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match &self.weights {
            Some(w) if w.len() != dim => Err(Error::DimensionMismatch { expected: w.len(), got: dim }),
            _ => Ok(()),
        }
    }

    /// Unchecked evaluation on a raw slice. Entries are taken in absolute value.
    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        let base = match (&self.kind, &self.weights) {
            (NormKind::L1, _) => x.iter().map(|v| v.abs()).sum(),
            (NormKind::LInf, _) => x.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            (NormKind::WeightedL1, Some(w)) => x.iter().zip(w).map(|(v, w)| w * v.abs()).sum(),
            (NormKind::WeightedLInf, Some(w)) => x.iter().zip(w).fold(0.0_f64, |m, (v, w)| m.max(w * v.abs())),
            (_, None) => unreachable!("weighted norm without weights"),
        };
        self.scale * base
    }

    /// Smallest `alpha` with `||x||_self <= alpha * ||x||_other` for all `x`.
    ///
    /// Closed form for every pair of supported kinds: with per-coordinate
    /// weights `a_i` (self) and `b_i` (other), the bound is `sum a_i/b_i` when
    /// self is an l1 type and other an l-infinity type, and `max a_i/b_i`
    /// otherwise.
    pub fn equivalence_constant(&self, other: &MonotoneNorm, dim: usize) -> Result<f64> {
        self.check_dim(dim)?;
        other.check_dim(dim)?;
        if self == other {
            return Ok(1.0);
        }
        let a = self.effective_weights(dim);
        let b = other.effective_weights(dim);
        let ratios = a.iter().zip(&b).map(|(a, b)| a / b);
        let self_l1 = matches!(self.kind, NormKind::L1 | NormKind::WeightedL1);
        let other_linf = matches!(other.kind, NormKind::LInf | NormKind::WeightedLInf);
        Ok(if self_l1 && other_linf { ratios.sum() } else { ratios.fold(0.0_f64, f64::max) })
    }

    fn effective_weights(&self, dim: usize) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.iter().map(|w| w * self.scale).collect(),
            None => vec![self.scale; dim],
        }
    }
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidNorm("weight vector is empty".into()));
    }
    if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidNorm(format!("weights must be positive and finite, got {bad}")));
    }
    Ok(())
}
