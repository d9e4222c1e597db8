//! Conditional eigenvalue problems and spectral radii of GI mappings.

use serde::{Deserialize, Serialize};

use crate::asymptotic::AsymptoticMapping;
use crate::error::{Error, Result};
use crate::mapping::{apply_checked, InterferenceMapping, MappingClass};
use crate::norm::MonotoneNorm;
use crate::vector::{sup_dist, sup_norm, NonnegVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sup-norm tolerance on successive iterates, relative once they exceed 1.
    pub tol_x: f64,
    /// Tolerance on successive eigenvalue estimates, relative once they exceed 1.
    pub tol_lambda: f64,
    pub max_iter: usize,
    /// Start vector; all ones when absent.
    pub x0: Option<NonnegVector>,
    /// Half-width of the band around 1 in which existence verdicts are withheld.
    pub tol_boundary: f64,
    /// Iterate sup-norm above which the plain iteration is declared divergent.
    pub divergence_ceiling: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_x: 1e-10,
            tol_lambda: 1e-10,
            max_iter: 100_000,
            x0: None,
            tol_boundary: 1e-6,
            divergence_ceiling: 1e12,
        }
    }
}

impl SolverConfig {
    /// Sets both iterate and eigenvalue tolerances.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol_x = tol;
        self.tol_lambda = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_x0(mut self, x0: NonnegVector) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol_x", self.tol_x),
            ("tol_lambda", self.tol_lambda),
            ("tol_boundary", self.tol_boundary),
            ("divergence_ceiling", self.divergence_ceiling),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// A solution `(x*, lambda*)` of `T(x) = lambda x`, `||x|| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub x_star: NonnegVector,
    pub lambda_star: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `||T(x*) - lambda* x*||_inf`.
    pub residual: f64,
}

/// Normalized fixed-point iteration `x <- T(x)/||T(x)||`.
///
/// Stops once both the iterate and the eigenvalue estimate settle. When
/// `max_iter` runs out the last iterate is returned with `converged = false`.
pub fn solve_conditional_eigenproblem(
    t: &dyn InterferenceMapping,
    norm: &MonotoneNorm,
    cfg: &SolverConfig,
) -> Result<EigenSolution> {
    cfg.validate()?;
    let n = t.dim();
    norm.check_dim(n)?;
    let start = match &cfg.x0 {
        Some(x0) => {
            if x0.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: x0.dim() });
            }
            if !x0.is_strictly_positive() {
                return Err(Error::NonPositiveStart);
            }
            x0.as_slice().to_vec()
        }
        None => vec![1.0; n],
    };
    let s = norm.value(&start);
    let mut x: Vec<f64> = start.iter().map(|v| v / s).collect();

    let mut tx = apply_checked(t, &x)?;
    let mut lambda = norm.value(&tx);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        if lambda == 0.0 {
            return Err(Error::DegenerateIterate);
        }
        iterations += 1;
        let next: Vec<f64> = tx.iter().map(|v| v / lambda).collect();
        let t_next = apply_checked(t, &next)?;
        let lambda_next = norm.value(&t_next);
        let dx = sup_dist(&next, &x);
        let dl = (lambda_next - lambda).abs();
        x = next;
        tx = t_next;
        lambda = lambda_next;
        if dx <= cfg.tol_x * sup_norm(&x).max(1.0) && dl <= cfg.tol_lambda * lambda.max(1.0) {
            converged = true;
            break;
        }
    }
    let residual = x.iter().zip(&tx).fold(0.0_f64, |m, (x, t)| m.max((t - lambda * x).abs()));
    Ok(EigenSolution { x_star: NonnegVector::from_trusted(x), lambda_star: lambda, iterations, converged, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusStatus {
    /// The returned value is certified to the solver tolerance.
    Exact,
    /// The eigenvector iterate reached the boundary of the orthant and the
    /// certificate bracket did not close; only `[lower, upper]` is known.
    NeedsBudgetMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRadius {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub status: RadiusStatus,
    pub iterations: usize,
    /// Normalized eigenvector estimate (numeric form only).
    pub eigenvector: Option<Vec<f64>>,
}

impl SpectralRadius {
    pub fn is_exact(&self) -> bool {
        self.status == RadiusStatus::Exact
    }
}

const BRACKET_TOL: f64 = 1e-7;
const FIRST_PASS_ITER: usize = 2_000;
const SUPPORT_THRESHOLD: f64 = 1e-6;

/// Spectral radius of an asymptotic (hence GI) mapping.
///
/// The linear form uses the Perron root of its matrix. The numeric form runs
/// the normalized iteration and then brackets the radius: the lower end is
/// the Collatz-Wielandt minimum `min T(x)_i / x_i` over the support of the
/// eigenvector estimate, the upper end is the smallest `max T(x)_i / x_i`
/// over strictly positive perturbations `x + eps*1`. The value is exact
/// when the bracket closes.
pub fn spectral_radius(a: &AsymptoticMapping, norm: &MonotoneNorm, cfg: &SolverConfig) -> Result<SpectralRadius> {
    cfg.validate()?;
    if let Some(m) = a.matrix() {
        let r = m.perron_root(cfg.tol_lambda.min(1e-12), cfg.max_iter)?;
        return Ok(SpectralRadius {
            value: r.value,
            lower: r.lower,
            upper: r.upper,
            status: RadiusStatus::Exact,
            iterations: r.iterations,
            eigenvector: None,
        });
    }
    let n = a.dim();
    norm.check_dim(n)?;
    let first = cfg.clone().with_max_iter(cfg.max_iter.min(FIRST_PASS_ITER));
    let (x, mut iterations) = match solve_conditional_eigenproblem(a, norm, &first) {
        Ok(sol) => (sol.x_star.into_vec(), sol.iterations),
        Err(Error::DegenerateIterate) => (vec![1.0; n], 0),
        Err(e) => return Err(e),
    };
    let (mut x, mut lower, mut upper) = bracket(a, x)?;
    if !closed(lower, upper) && upper > 0.0 {
        // Retry on T + shift*I, which shares eigenvectors with T and is aperiodic.
        let shifted = Shifted { inner: a, shift: upper };
        let start: Vec<f64> = x.iter().map(|v| v + 1e-3).collect();
        let cfg = cfg.clone().with_x0(NonnegVector::from_trusted(start));
        if let Ok(sol) = solve_conditional_eigenproblem(&shifted, norm, &cfg) {
            iterations += sol.iterations;
            let (y, lo, up) = bracket(a, sol.x_star.into_vec())?;
            if up - lo < upper - lower {
                x = y;
            }
            lower = lower.max(lo);
            upper = upper.min(up).max(lower);
        }
    }
    let status = if closed(lower, upper) { RadiusStatus::Exact } else { RadiusStatus::NeedsBudgetMethod };
    let value = match status {
        RadiusStatus::Exact => 0.5 * (lower + upper),
        RadiusStatus::NeedsBudgetMethod => upper,
    };
    Ok(SpectralRadius { value, lower, upper, status, iterations, eigenvector: Some(x) })
}

fn closed(lower: f64, upper: f64) -> bool {
    upper - lower <= BRACKET_TOL * upper.max(1.0)
}

/// Collatz-Wielandt bracket around the sup-normalized estimate `x`.
fn bracket(a: &dyn InterferenceMapping, x: Vec<f64>) -> Result<(Vec<f64>, f64, f64)> {
    let scale = sup_norm(&x);
    let x: Vec<f64> = x.iter().map(|v| v / scale).collect();
    let support: Vec<f64> = x.iter().map(|&v| if v > SUPPORT_THRESHOLD { v } else { 0.0 }).collect();
    let ts = apply_checked(a, &support)?;
    let lower = support.iter().zip(&ts).filter(|(s, _)| **s > 0.0).map(|(s, t)| t / s).fold(f64::INFINITY, f64::min);
    let lower = if lower.is_finite() { lower } else { 0.0 };
    let mut upper = f64::INFINITY;
    for k in 0..=12 {
        let eps = 10f64.powi(-k);
        let y: Vec<f64> = x.iter().map(|v| v + eps).collect();
        let ty = apply_checked(a, &y)?;
        let bound = y.iter().zip(&ty).map(|(y, t)| t / y).fold(0.0_f64, f64::max);
        upper = upper.min(bound);
    }
    Ok((x, lower, upper.max(lower)))
}

/// `x -> T(x) + shift * x`.
struct Shifted<'a> {
    inner: &'a dyn InterferenceMapping,
    shift: f64,
}

impl InterferenceMapping for Shifted<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn class(&self) -> MappingClass {
        self.inner.class()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.inner.apply(x)?.iter().zip(x).map(|(t, v)| t + self.shift * v).collect())
    }
}

/// Upper bounds `lambda_b = 1/U(b)` on the spectral radius of `T_inf`, one
/// per budget `b`, from the eigenproblem with norm `||.||_a / b`.
///
/// The sequence is nonincreasing in the budget and decreases toward the
/// radius.
pub fn spectral_radius_upper_via_budget(
    t: &dyn InterferenceMapping,
    budgets: &[f64],
    norm_a: &MonotoneNorm,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    check_increasing(budgets)?;
    budgets
        .iter()
        .map(|&b| {
            let norm = norm_a.for_budget(b)?;
            Ok(solve_conditional_eigenproblem(t, &norm, cfg)?.lambda_star)
        })
        .collect()
}

pub(crate) fn check_increasing(budgets: &[f64]) -> Result<()> {
    if budgets.is_empty() {
        return Err(Error::InvalidConfig("at least one budget is required".into()));
    }
    if let Some(b) = budgets.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
        return Err(Error::InvalidConfig(format!("budgets must be positive and finite, got {b}")));
    }
    if budgets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("budgets must be strictly increasing".into()));
    }
    Ok(())
}
