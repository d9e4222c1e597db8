//! Self-mappings of the nonnegative orthant and their declared classes.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::vector::NonnegVector;

/// Declared class of a mapping.
///
/// `Gi` follows the weaker definition that does not require `f(x) > 0` for
/// some positive `x`; callers needing positivity must check it separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingClass {
    /// Standard interference: monotone and strictly scalable.
    Si,
    /// Weakly standard interference: monotone and weakly scalable.
    Wsi,
    /// General interference: monotone and positively homogeneous.
    Gi,
    /// `x -> Xx + u` with nonnegative `X` and `u`.
    Affine,
    LoadModel,
    CappedLoadModel,
    PowerModel,
    /// Unknown class; no structural guarantees.
    Custom,
}

impl MappingClass {
    pub fn is_weakly_standard(self) -> bool {
        !matches!(self, MappingClass::Custom)
    }

    /// Classes whose members are standard interference mappings by construction.
    pub fn is_standard(self) -> bool {
        matches!(
            self,
            MappingClass::Si | MappingClass::LoadModel | MappingClass::CappedLoadModel | MappingClass::PowerModel
        )
    }
}

impl fmt::Display for MappingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MappingClass::Si => "SI",
            MappingClass::Wsi => "WSI",
            MappingClass::Gi => "GI",
            MappingClass::Affine => "Affine",
            MappingClass::LoadModel => "LoadModel",
            MappingClass::CappedLoadModel => "CappedLoadModel",
            MappingClass::PowerModel => "PowerModel",
            MappingClass::Custom => "Custom",
        };
        f.write_str(s)
    }
}

/// A mapping from the nonnegative orthant into itself.
///
/// Implementations are pure: evaluation has no side effects and the same
/// input always produces the same output, so a mapping can be shared across
/// threads.
pub trait InterferenceMapping: Send + Sync {
    fn dim(&self) -> usize;

    fn class(&self) -> MappingClass;

    /// Raw evaluation. `x` has length `dim()` and nonnegative entries.
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// The matrix `A` with `T_inf(x) = Ax`, when known in closed form.
    fn linear_asymptote(&self) -> Option<Matrix> {
        None
    }

    /// Whether the mapping is declared linear on the orthant.
    fn is_linear(&self) -> bool {
        false
    }

    /// Checked evaluation: validates the input dimension and the output.
    fn evaluate(&self, x: &NonnegVector) -> Result<NonnegVector> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        let y = self.apply(x.as_slice())?;
        check_output(&y, self.dim())?;
        Ok(NonnegVector::from_trusted(y))
    }
}

pub type SharedMapping = Arc<dyn InterferenceMapping>;

pub(crate) fn check_output(y: &[f64], dim: usize) -> Result<()> {
    if y.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: y.len() });
    }
    match y.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        Some((index, &value)) => Err(Error::InvalidEvaluation { index, value }),
        None => Ok(()),
    }
}

/// Evaluates and validates in one step; used by the solvers.
pub(crate) fn apply_checked(t: &dyn InterferenceMapping, x: &[f64]) -> Result<Vec<f64>> {
    let y = t.apply(x)?;
    check_output(&y, t.dim())?;
    Ok(y)
}

/// `x -> Xx + u`.
///
/// Built with [`AffineMapping::new`] it carries the `Affine` class (standard
/// when `u > 0`); [`AffineMapping::linear`] builds the `u = 0` case, which is
/// a linear GI mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMapping {
    matrix: Matrix,
    offset: Vec<f64>,
    class: MappingClass,
}

impl AffineMapping {
    pub fn new(matrix: Matrix, offset: Vec<f64>) -> Result<Self> {
        if !matrix.is_nonnegative() {
            return Err(Error::InvalidConfig("affine matrix must be nonnegative".into()));
        }
        if offset.len() != matrix.dim() {
            return Err(Error::DimensionMismatch { expected: matrix.dim(), got: offset.len() });
        }
        NonnegVector::new(offset.clone())?;
        Ok(Self { matrix, offset, class: MappingClass::Affine })
    }

    pub fn linear(matrix: Matrix) -> Result<Self> {
        let n = matrix.dim();
        let mut m = Self::new(matrix, vec![0.0; n])?;
        m.class = MappingClass::Gi;
        Ok(m)
    }

    /// One-dimensional `p -> slope * p + offset`.
    pub fn scalar(slope: f64, offset: f64) -> Result<Self> {
        Self::new(Matrix::from_rows(&[vec![slope]])?, vec![offset])
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }
}

impl InterferenceMapping for AffineMapping {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn class(&self) -> MappingClass {
        self.class
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.matrix.mul_vec(x);
        y.iter_mut().zip(&self.offset).for_each(|(y, u)| *y += u);
        Ok(y)
    }

    fn linear_asymptote(&self) -> Option<Matrix> {
        Some(self.matrix.clone())
    }

    fn is_linear(&self) -> bool {
        self.class == MappingClass::Gi
    }
}

/// The two-dimensional positive concave mapping
/// `(x1, x2) -> (ln(1 + x2) + alpha*x1 + 0.1, sqrt(x1 + x2 + 1))`,
/// whose asymptotic mapping is `x -> [[alpha, 0], [0, 0]] x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSqrtMapping {
    alpha: f64,
}

impl LogSqrtMapping {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidConfig(format!("alpha must be nonnegative, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl InterferenceMapping for LogSqrtMapping {
    fn dim(&self) -> usize {
        2
    }

    fn class(&self) -> MappingClass {
        MappingClass::Si
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![x[1].ln_1p() + self.alpha * x[0] + 0.1, (x[0] + x[1] + 1.0).sqrt()])
    }
}

/// `x -> G(x) + u`; standard whenever `G` is GI and `u > 0`.
pub struct OffsetMapping {
    inner: SharedMapping,
    offset: Vec<f64>,
}

impl OffsetMapping {
    pub fn new(inner: SharedMapping, offset: Vec<f64>) -> Result<Self> {
        if offset.len() != inner.dim() {
            return Err(Error::DimensionMismatch { expected: inner.dim(), got: offset.len() });
        }
        NonnegVector::new(offset.clone())?;
        Ok(Self { inner, offset })
    }
}

impl InterferenceMapping for OffsetMapping {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn class(&self) -> MappingClass {
        let positive = self.offset.iter().all(|u| *u > 0.0);
        match self.inner.class() {
            MappingClass::Gi if positive => MappingClass::Si,
            c if c.is_standard() || c == MappingClass::Si => MappingClass::Si,
            MappingClass::Custom => MappingClass::Custom,
            _ => MappingClass::Wsi,
        }
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.inner.apply(x)?;
        y.iter_mut().zip(&self.offset).for_each(|(y, u)| *y += u);
        Ok(y)
    }

    fn linear_asymptote(&self) -> Option<Matrix> {
        self.inner.linear_asymptote()
    }
}

type EvalFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A mapping given by a closure with a caller-declared class.
pub struct FnMapping {
    dim: usize,
    class: MappingClass,
    linear: bool,
    f: Box<EvalFn>,
}

impl FnMapping {
    pub fn new<F>(dim: usize, class: MappingClass, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        assert!(dim > 0, "dimension must be positive");
        Self { dim, class, linear: false, f: Box::new(f) }
    }

    /// Declares the closure linear; only meaningful for the GI class.
    pub fn declared_linear(mut self) -> Self {
        self.linear = true;
        self
    }
}

impl InterferenceMapping for FnMapping {
    fn dim(&self) -> usize {
        self.dim
    }

    fn class(&self) -> MappingClass {
        self.class
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self.f)(x))
    }

    fn is_linear(&self) -> bool {
        self.linear
    }
}

impl fmt::Debug for FnMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnMapping")
            .field("dim", &self.dim)
            .field("class", &self.class)
            .field("linear", &self.linear)
            .finish()
    }
}
