//! The canonical max-min utility problem: maximize `u` subject to
//! `p = u T(p)` and `||p||_a <= budget`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotic::{derive_asymptotic, LimitSchedule};
use crate::error::{Error, Result};
use crate::mapping::{apply_checked, SharedMapping};
use crate::norm::MonotoneNorm;
use crate::spectral::{check_increasing, solve_conditional_eigenproblem, spectral_radius, RadiusStatus, SolverConfig};
use crate::vector::NonnegVector;

/// Radii at or below this value leave the transition point undefined.
pub const RHO_UNDEFINED_BELOW: f64 = 1e-6;

const MONOTONE_TOL: f64 = 1e-10;

#[derive(Clone)]
pub struct CanonicalProblem {
    pub mapping: SharedMapping,
    pub norm_a: MonotoneNorm,
    pub norm_b: MonotoneNorm,
    /// A constant with `||x||_a <= alpha ||x||_b` for all `x`.
    pub alpha: f64,
}

impl std::fmt::Debug for CanonicalProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CanonicalProblem")
            .field("dim", &self.mapping.dim())
            .field("class", &self.mapping.class())
            .field("norm_a", &self.norm_a)
            .field("norm_b", &self.norm_b)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl CanonicalProblem {
    /// Builds the problem with the tightest equivalence constant.
    pub fn new(mapping: SharedMapping, norm_a: MonotoneNorm, norm_b: MonotoneNorm) -> Result<Self> {
        let alpha = norm_a.equivalence_constant(&norm_b, mapping.dim())?;
        Ok(Self { mapping, norm_a, norm_b, alpha })
    }

    /// Uses the same norm for budget and efficiency.
    pub fn single_norm(mapping: SharedMapping, norm: MonotoneNorm) -> Result<Self> {
        Self::new(mapping, norm.clone(), norm)
    }

    /// Overrides `alpha` after checking it on the unit vectors and on 1000
    /// seeded random points.
    pub fn with_alpha(mut self, alpha: f64, seed: u64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {alpha}")));
        }
        let n = self.mapping.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut probes: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        probes.extend((0..1000).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()));
        for x in &probes {
            let (a, b) = (self.norm_a.value(x), self.norm_b.value(x));
            if a > alpha * b * (1.0 + 1e-12) {
                return Err(Error::InvalidConfig(format!(
                    "alpha {alpha} is not a valid equivalence constant: ||x||_a = {a}, ||x||_b = {b}"
                )));
            }
        }
        self.alpha = alpha;
        Ok(self)
    }

    /// `T(0)`.
    pub fn noise_vector(&self) -> Result<Vec<f64>> {
        apply_checked(self.mapping.as_ref(), &vec![0.0; self.mapping.dim()])
    }

    /// The spectral radius of the asymptotic mapping, or a lower bound for
    /// it when only a bracket is available.
    pub fn asymptotic_radius(&self, cfg: &SolverConfig) -> Result<(f64, RadiusStatus)> {
        let a = derive_asymptotic(&self.mapping, &LimitSchedule::default())?;
        let sr = spectral_radius(&a, &self.norm_a, cfg)?;
        Ok(match sr.status {
            RadiusStatus::Exact => (sr.value, sr.status),
            RadiusStatus::NeedsBudgetMethod => (sr.lower, sr.status),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSolution {
    pub budget: f64,
    /// `P(budget)`.
    pub power: NonnegVector,
    /// `U(budget)`.
    pub utility: f64,
    /// `1 / U(budget)`.
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `||p - u T(p)||_inf`.
    pub residual: f64,
}

/// Solves the canonical problem at one budget through the eigenproblem with
/// the norm `||.||_a / budget`.
pub fn solve_canonical(prob: &CanonicalProblem, budget: f64, cfg: &SolverConfig) -> Result<CanonicalSolution> {
    let norm = prob.norm_a.for_budget(budget)?;
    let sol = solve_conditional_eigenproblem(prob.mapping.as_ref(), &norm, cfg)?;
    if !sol.converged {
        return Err(Error::NotConverged {
            what: "canonical problem iteration",
            iterations: sol.iterations,
            last_change: sol.residual,
        });
    }
    let lambda = sol.lambda_star;
    let p = sol.x_star;
    let na = prob.norm_a.value(p.as_slice());
    if (na - budget).abs() > 1e-8 * budget {
        return Err(Error::SolutionCheck(format!("||p||_a = {na} differs from budget {budget}")));
    }
    let utility = 1.0 / lambda;
    let tp = apply_checked(prob.mapping.as_ref(), p.as_slice())?;
    let residual = p.as_slice().iter().zip(&tp).fold(0.0_f64, |m, (p, t)| m.max((p - utility * t).abs()));
    let bound = 2.0 * cfg.tol_x.max(cfg.tol_lambda) * (1.0 + lambda) * p.sup_norm().max(1.0) / lambda;
    if residual > bound {
        return Err(Error::SolutionCheck(format!("residual {residual:.3e} exceeds {bound:.3e}")));
    }
    Ok(CanonicalSolution { budget, power: p, utility, lambda, iterations: sol.iterations, converged: true, residual })
}

fn check_rho(rho_inf: f64) -> Result<()> {
    if rho_inf.is_finite() && rho_inf > 0.0 {
        Ok(())
    } else {
        Err(Error::Undefined(format!("bound undefined for spectral radius {rho_inf}")))
    }
}

/// `budget / ||T(0)||_a` up to the transition point, `1/rho` beyond it.
pub fn utility_bound(prob: &CanonicalProblem, budget: f64, rho_inf: f64) -> Result<f64> {
    check_rho(rho_inf)?;
    let t0 = prob.norm_a.value(&prob.noise_vector()?);
    let p_t = t0 / rho_inf;
    Ok(if budget <= p_t { budget / t0 } else { 1.0 / rho_inf })
}

/// `min(1/||T(0)||_b, alpha/(rho * budget))`.
pub fn efficiency_bound(prob: &CanonicalProblem, budget: f64, rho_inf: f64) -> Result<f64> {
    check_rho(rho_inf)?;
    let t0 = prob.norm_b.value(&prob.noise_vector()?);
    Ok((1.0 / t0).min(prob.alpha / (rho_inf * budget)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TransitionPoint {
    Defined { value: f64 },
    Undefined { reason: String },
}

impl TransitionPoint {
    pub fn value(&self) -> Option<f64> {
        match self {
            TransitionPoint::Defined { value } => Some(*value),
            TransitionPoint::Undefined { .. } => None,
        }
    }
}

/// `||T(0)||_a / rho`.
pub fn transition_point(prob: &CanonicalProblem, rho_inf: f64) -> Result<TransitionPoint> {
    if rho_inf.is_nan() || rho_inf <= RHO_UNDEFINED_BELOW {
        return Ok(TransitionPoint::Undefined {
            reason: format!(
                "spectral radius {rho_inf:.3e} is at most {RHO_UNDEFINED_BELOW:e}; utility grows without saturating"
            ),
        });
    }
    let t0 = prob.norm_a.value(&prob.noise_vector()?);
    Ok(TransitionPoint::Defined { value: t0 / rho_inf })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub budget: f64,
    pub utility: f64,
    pub power: Vec<f64>,
    pub efficiency: f64,
    pub utility_bound: f64,
    pub efficiency_bound: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Solver failure for this row; numeric fields are NaN when set.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub rho_inf: f64,
    pub rho_status: RadiusStatus,
    pub transition_point: TransitionPoint,
    /// Monotonicity deviations beyond the row tolerance.
    pub warnings: Vec<String>,
}

/// Solves the canonical problem at every budget.
///
/// Rows run in parallel on the current rayon pool and come back ordered by
/// budget. Bounds use the radius of the asymptotic mapping (its certified
/// lower end when only a bracket is known); when that radius is zero the
/// bounds take their limiting form `budget/||T(0)||_a` and `1/||T(0)||_b`.
pub fn sweep(prob: &CanonicalProblem, budgets: &[f64], cfg: &SolverConfig) -> Result<Sweep> {
    check_increasing(budgets)?;
    cfg.validate()?;
    let (rho, rho_status) = prob.asymptotic_radius(cfg)?;
    let tp = transition_point(prob, rho)?;
    let noise = prob.noise_vector()?;
    let t0a = prob.norm_a.value(&noise);
    let t0b = prob.norm_b.value(&noise);

    let rows: Vec<SweepRow> = budgets
        .par_iter()
        .map(|&budget| {
            let (ub, eb) = if rho > 0.0 {
                (
                    if budget <= t0a / rho { budget / t0a } else { 1.0 / rho },
                    (1.0 / t0b).min(prob.alpha / (rho * budget)),
                )
            } else {
                (budget / t0a, 1.0 / t0b)
            };
            match solve_canonical(prob, budget, cfg) {
                Ok(s) => {
                    let nb = prob.norm_b.value(s.power.as_slice());
                    SweepRow {
                        budget,
                        utility: s.utility,
                        efficiency: s.utility / nb,
                        power: s.power.into_vec(),
                        utility_bound: ub,
                        efficiency_bound: eb,
                        lambda: s.lambda,
                        iterations: s.iterations,
                        residual: s.residual,
                        error: None,
                    }
                }
                Err(e) => SweepRow {
                    budget,
                    utility: f64::NAN,
                    power: Vec::new(),
                    efficiency: f64::NAN,
                    utility_bound: ub,
                    efficiency_bound: eb,
                    lambda: f64::NAN,
                    iterations: 0,
                    residual: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut warnings = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.error.is_some() || b.error.is_some() {
            continue;
        }
        if b.utility <= a.utility - MONOTONE_TOL * a.utility {
            warnings.push(format!(
                "utility not increasing between budgets {:e} and {:e}: {} -> {}",
                a.budget, b.budget, a.utility, b.utility
            ));
        }
        if b.efficiency > a.efficiency + MONOTONE_TOL * a.efficiency {
            warnings.push(format!(
                "efficiency increased between budgets {:e} and {:e}: {} -> {}",
                a.budget, b.budget, a.efficiency, b.efficiency
            ));
        }
    }
    Ok(Sweep { rows, rho_inf: rho, rho_status, transition_point: tp, warnings })
}

/// `n` points from `a` to `b`, log-spaced when `log` is set.
pub fn budget_grid(a: f64, b: f64, n: usize, log: bool) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > a) {
        return Err(Error::InvalidConfig(format!("budget range must satisfy 0 < a < b, got {a}:{b}")));
    }
    if n < 2 {
        return Err(Error::InvalidConfig("a budget grid needs at least 2 points".into()));
    }
    let step = |k: usize| k as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|k| match (k, log) {
            (0, _) => a,
            (k, _) if k == n - 1 => b,
            (k, true) => (a.ln() + step(k) * (b.ln() - a.ln())).exp(),
            (k, false) => a + step(k) * (b - a),
        })
        .collect())
}
