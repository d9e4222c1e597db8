//! Asymptotic mappings `T_inf(x) = lim_{h -> inf} T(hx)/h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{apply_checked, InterferenceMapping, MappingClass, SharedMapping};
use crate::matrix::Matrix;
use crate::vector::{sup_dist, sup_norm};

/// Geometric scale sequence `h_n = h0 * growth^n` for the numeric limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSchedule {
    pub h0: f64,
    pub growth: f64,
    /// Relative sup-norm threshold on successive iterates.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for LimitSchedule {
    fn default() -> Self {
        Self { h0: 1.0, growth: 10.0, tol: 1e-9, max_steps: 40 }
    }
}

impl LimitSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.h0.is_finite() && self.h0 > 0.0) {
            return Err(Error::InvalidConfig(format!("h0 must be positive, got {}", self.h0)));
        }
        if !(self.growth.is_finite() && self.growth > 1.0) {
            return Err(Error::InvalidConfig(format!("growth must exceed 1, got {}", self.growth)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// The scale `h_n`.
    pub fn scale(&self, n: usize) -> f64 {
        self.h0 * self.growth.powi(n as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AsymptoticForm {
    /// `T_inf(x) = Ax`.
    Linear(Matrix),
    /// Evaluated through the limit on the given schedule.
    Numeric(LimitSchedule),
}

/// Outcome of one numeric limit evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitEvaluation {
    pub value: Vec<f64>,
    pub steps: usize,
    /// Sup-norm distance between the last two iterates.
    pub gap: f64,
    /// Set when `T(h x)` stopped being finite before the tolerance was met;
    /// `value` is then the last finite iterate.
    pub reduced_confidence: bool,
}

/// The asymptotic mapping of a weakly standard mapping. It is always GI.
#[derive(Clone)]
pub struct AsymptoticMapping {
    source: SharedMapping,
    form: AsymptoticForm,
}

impl std::fmt::Debug for AsymptoticMapping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AsymptoticMapping")
            .field("source_class", &self.source.class())
            .field("dim", &self.source.dim())
            .field("form", &self.form)
            .finish()
    }
}

/// Picks the cheapest exact representation of `T_inf` available for `t`.
///
/// Mappings exposing a closed-form linear asymptote (affine and load
/// models) get the linear form. A GI mapping declared linear is probed at
/// the unit vectors. Everything else uses the numeric limit on `schedule`.
pub fn derive_asymptotic(t: &SharedMapping, schedule: &LimitSchedule) -> Result<AsymptoticMapping> {
    schedule.validate()?;
    let class = t.class();
    if !class.is_weakly_standard() {
        return Err(Error::NotWeaklyStandard(class.to_string()));
    }
    if let Some(a) = t.linear_asymptote() {
        if a.dim() != t.dim() {
            return Err(Error::DimensionMismatch { expected: t.dim(), got: a.dim() });
        }
        return Ok(AsymptoticMapping { source: t.clone(), form: AsymptoticForm::Linear(a) });
    }
    if class == MappingClass::Gi && t.is_linear() {
        let n = t.dim();
        let mut a = Matrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = apply_checked(t.as_ref(), &e)?;
            for (i, v) in col.into_iter().enumerate() {
                a[(i, j)] = v;
            }
            e[j] = 0.0;
        }
        return Ok(AsymptoticMapping { source: t.clone(), form: AsymptoticForm::Linear(a) });
    }
    Ok(AsymptoticMapping { source: t.clone(), form: AsymptoticForm::Numeric(*schedule) })
}

impl AsymptoticMapping {
    /// Forces the numeric form, bypassing any closed form.
    pub fn numeric(t: &SharedMapping, schedule: &LimitSchedule) -> Result<Self> {
        schedule.validate()?;
        if !t.class().is_weakly_standard() {
            return Err(Error::NotWeaklyStandard(t.class().to_string()));
        }
        Ok(Self { source: t.clone(), form: AsymptoticForm::Numeric(*schedule) })
    }

    pub fn source(&self) -> &SharedMapping {
        &self.source
    }

    pub fn form(&self) -> &AsymptoticForm {
        &self.form
    }

    pub fn matrix(&self) -> Option<&Matrix> {
        match &self.form {
            AsymptoticForm::Linear(a) => Some(a),
            AsymptoticForm::Numeric(_) => None,
        }
    }

    /// Evaluates `T_inf(x)` with limit diagnostics. The linear form reports
    /// zero steps and zero gap.
    pub fn evaluate_limit(&self, x: &[f64]) -> Result<LimitEvaluation> {
        let n = self.source.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let sched = match &self.form {
            AsymptoticForm::Linear(a) => {
                return Ok(LimitEvaluation { value: a.mul_vec(x), steps: 0, gap: 0.0, reduced_confidence: false })
            }
            AsymptoticForm::Numeric(s) => s,
        };
        let xs = sup_norm(x);
        if xs == 0.0 {
            return Ok(LimitEvaluation { value: vec![0.0; n], steps: 0, gap: 0.0, reduced_confidence: false });
        }
        let mut prev = match self.scaled_eval(x, sched.scale(0))? {
            Some(g) => g,
            None => return Err(Error::InvalidEvaluation { index: 0, value: f64::INFINITY }),
        };
        let mut gap = f64::INFINITY;
        for step in 1..=sched.max_steps {
            let g = match self.scaled_eval(x, sched.scale(step))? {
                Some(g) => g,
                None => {
                    return Ok(LimitEvaluation { value: prev, steps: step, gap, reduced_confidence: true });
                }
            };
            let scale = sup_norm(&prev).max(xs);
            if let Some((index, (&p, &c))) =
                prev.iter().zip(&g).enumerate().find(|(_, (p, c))| **c - **p > sched.tol * scale)
            {
                return Err(Error::NonMonotoneLimit { step, index, previous: p, current: c });
            }
            gap = sup_dist(&g, &prev);
            if gap <= sched.tol * sup_norm(&g).max(xs) {
                return Ok(LimitEvaluation { value: g, steps: step, gap, reduced_confidence: false });
            }
            prev = g;
        }
        let last = prev.clone();
        let h = sched.scale(sched.max_steps - 1);
        let previous = match self.scaled_eval(x, h)? {
            Some(v) => v,
            None => last.clone(),
        };
        Err(Error::LimitNotConverged { steps: sched.max_steps, gap, last, previous })
    }

    /// `T(hx)/h`, or `None` once `T(hx)` is no longer finite.
    fn scaled_eval(&self, x: &[f64], h: f64) -> Result<Option<Vec<f64>>> {
        let hx: Vec<f64> = x.iter().map(|v| v * h).collect();
        if hx.iter().any(|v| !v.is_finite()) {
            return Ok(None);
        }
        let y = self.source.apply(&hx)?;
        if y.len() != hx.len() {
            return Err(Error::DimensionMismatch { expected: hx.len(), got: y.len() });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Ok(None);
        }
        if let Some((index, &value)) = y.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::InvalidEvaluation { index, value });
        }
        Ok(Some(y.into_iter().map(|v| v / h).collect()))
    }
}

impl InterferenceMapping for AsymptoticMapping {
    fn dim(&self) -> usize {
        self.source.dim()
    }

    fn class(&self) -> MappingClass {
        MappingClass::Gi
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate_limit(x)?.value)
    }

    fn linear_asymptote(&self) -> Option<Matrix> {
        self.matrix().cloned()
    }

    fn is_linear(&self) -> bool {
        self.matrix().is_some()
    }
}
