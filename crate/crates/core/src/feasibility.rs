//! Existence and computation of fixed points of standard mappings, and
//! feasibility within a norm ball.

use serde::{Deserialize, Serialize};

use crate::asymptotic::{derive_asymptotic, LimitSchedule};
use crate::error::{Error, Result};
use crate::mapping::{apply_checked, InterferenceMapping, SharedMapping};
use crate::norm::MonotoneNorm;
use crate::spectral::{solve_conditional_eigenproblem, spectral_radius, EigenSolution, RadiusStatus, SolverConfig};
use crate::vector::{sup_dist, sup_norm, NonnegVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistenceVerdict {
    Exists,
    DoesNotExist,
    /// The radius is within `tol_boundary` of 1, or the bracket straddles 1.
    BoundaryInconclusive,
}

impl ExistenceVerdict {
    pub fn is_exists(self) -> bool {
        self == ExistenceVerdict::Exists
    }

    /// `Some(true)` / `Some(false)` for a verdict, `None` when inconclusive.
    pub fn as_bool(self) -> Option<bool> {
        match self {
            ExistenceVerdict::Exists => Some(true),
            ExistenceVerdict::DoesNotExist => Some(false),
            ExistenceVerdict::BoundaryInconclusive => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistenceMethod {
    SpectralRadius,
    BudgetMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceCheck {
    pub verdict: ExistenceVerdict,
    /// Best estimate of the spectral radius of `T_inf`.
    pub rho: f64,
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub method: ExistenceMethod,
}

/// Budgets `10^k` used when the spectral certificate is not conclusive.
const BUDGET_EXPONENTS: std::ops::RangeInclusive<i32> = 0..=12;

/// Decides whether a continuous standard mapping has a fixed point, which
/// holds exactly when the spectral radius of its asymptotic mapping is
/// below 1.
pub fn has_fixed_point(
    t: &SharedMapping,
    schedule: &LimitSchedule,
    norm: &MonotoneNorm,
    cfg: &SolverConfig,
) -> Result<ExistenceCheck> {
    let a = derive_asymptotic(t, schedule)?;
    let sr = spectral_radius(&a, norm, cfg)?;
    let tb = cfg.tol_boundary;
    if sr.status == RadiusStatus::Exact {
        let verdict = if sr.value < 1.0 - tb {
            ExistenceVerdict::Exists
        } else if sr.value > 1.0 + tb {
            ExistenceVerdict::DoesNotExist
        } else {
            ExistenceVerdict::BoundaryInconclusive
        };
        return Ok(ExistenceCheck {
            verdict,
            rho: sr.value,
            rho_lower: sr.lower,
            rho_upper: sr.upper,
            method: ExistenceMethod::SpectralRadius,
        });
    }

    let mut check = ExistenceCheck {
        verdict: ExistenceVerdict::BoundaryInconclusive,
        rho: sr.value,
        rho_lower: sr.lower,
        rho_upper: sr.upper,
        method: ExistenceMethod::BudgetMethod,
    };
    if sr.lower > 1.0 + tb {
        check.verdict = ExistenceVerdict::DoesNotExist;
        return Ok(check);
    }
    for k in BUDGET_EXPONENTS {
        if check.rho_upper < 1.0 - tb {
            break;
        }
        let scaled = norm.for_budget(10f64.powi(k))?;
        let sol = solve_conditional_eigenproblem(t.as_ref(), &scaled, cfg)?;
        if sol.converged {
            check.rho_upper = check.rho_upper.min(sol.lambda_star);
        }
    }
    check.rho = check.rho_upper;
    if check.rho_upper < 1.0 - tb {
        check.verdict = ExistenceVerdict::Exists;
    }
    Ok(check)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneDirection {
    Nondecreasing,
    Nonincreasing,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    /// `false` means the iterates crossed the divergence ceiling.
    pub exists: bool,
    pub point: Option<NonnegVector>,
    pub iterations: usize,
    pub monotone_direction: MonotoneDirection,
    /// `||T(x) - x||_inf` at the returned point, or at the last iterate on divergence.
    pub residual: f64,
}

/// Plain iteration `x <- T(x)` from `cfg.x0` (the origin when absent).
///
/// When the start satisfies `T(x0) >= x0` (always true at the origin) the
/// iterates must be nondecreasing, and symmetrically for `T(x0) <= x0`; a
/// violation means the mapping is not standard and is reported as an error.
/// The iteration stops when the residual, corrected for the observed
/// contraction rate, falls below `tol_x` relative to `1 + ||x||_inf`.
pub fn compute_fixed_point(t: &dyn InterferenceMapping, cfg: &SolverConfig) -> Result<FixedPointResult> {
    cfg.validate()?;
    let n = t.dim();
    let mut x = match &cfg.x0 {
        Some(x0) if x0.dim() != n => return Err(Error::DimensionMismatch { expected: n, got: x0.dim() }),
        Some(x0) => x0.as_slice().to_vec(),
        None => vec![0.0; n],
    };
    let mut y = apply_checked(t, &x)?;
    let direction = if y.iter().zip(&x).all(|(y, x)| y >= x) {
        MonotoneDirection::Nondecreasing
    } else if y.iter().zip(&x).all(|(y, x)| y <= x) {
        MonotoneDirection::Nonincreasing
    } else {
        MonotoneDirection::Mixed
    };

    let mut prev_step = f64::INFINITY;
    let mut ratio = 0.0_f64;
    for iteration in 1..=cfg.max_iter {
        let step = sup_dist(&y, &x);
        let size = sup_norm(&y);
        if size > cfg.divergence_ceiling {
            return Ok(FixedPointResult {
                exists: false,
                point: None,
                iterations: iteration,
                monotone_direction: direction,
                residual: step,
            });
        }
        if prev_step.is_finite() && prev_step > 0.0 {
            let r = (step / prev_step).min(1.0);
            ratio = if iteration <= 2 { r } else { ratio.max(r) * 0.5 + r * 0.5 };
        }
        let floor = 64.0 * f64::EPSILON * (1.0 + size);
        let target = cfg.tol_x * (1.0 + size) * (1.0 - ratio).max(1e-6);
        if step <= target.max(floor) {
            let residual = sup_dist(&apply_checked(t, &y)?, &y);
            return Ok(FixedPointResult {
                exists: true,
                point: Some(NonnegVector::from_trusted(y)),
                iterations: iteration,
                monotone_direction: direction,
                residual,
            });
        }
        let z = apply_checked(t, &y)?;
        check_direction(direction, &y, &z, iteration)?;
        prev_step = step;
        x = y;
        y = z;
    }
    Err(Error::NotConverged { what: "fixed-point iteration", iterations: cfg.max_iter, last_change: sup_dist(&y, &x) })
}

fn check_direction(direction: MonotoneDirection, prev: &[f64], next: &[f64], iteration: usize) -> Result<()> {
    let slack = |a: f64, b: f64| 1e-12 * a.abs().max(b.abs());
    let bad = match direction {
        MonotoneDirection::Nondecreasing => prev.iter().zip(next).position(|(p, n)| *n < p - slack(*p, *n)),
        MonotoneDirection::Nonincreasing => prev.iter().zip(next).position(|(p, n)| *n > p + slack(*p, *n)),
        MonotoneDirection::Mixed => None,
    };
    match bad {
        Some(index) => Err(Error::MonotonicityViolated { iteration, index }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallVerdict {
    FeasibleWithinBall,
    InfeasibleWithinBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedFeasibility {
    pub verdict: BallVerdict,
    pub lambda: f64,
    /// Set when `|lambda - 1| <= tol_boundary`.
    pub near_boundary: bool,
    pub solution: EigenSolution,
}

/// Whether the fixed point exists and lies in the unit ball of `norm`,
/// decided by `lambda* <= 1` for the eigenproblem with that norm.
pub fn constrained_feasibility(
    t: &dyn InterferenceMapping,
    norm: &MonotoneNorm,
    cfg: &SolverConfig,
) -> Result<ConstrainedFeasibility> {
    let solution = solve_conditional_eigenproblem(t, norm, cfg)?;
    if !solution.converged {
        return Err(Error::NotConverged {
            what: "conditional eigenvalue iteration",
            iterations: solution.iterations,
            last_change: solution.residual,
        });
    }
    let lambda = solution.lambda_star;
    let verdict = if lambda <= 1.0 { BallVerdict::FeasibleWithinBall } else { BallVerdict::InfeasibleWithinBall };
    Ok(ConstrainedFeasibility { verdict, lambda, near_boundary: (lambda - 1.0).abs() <= cfg.tol_boundary, solution })
}
