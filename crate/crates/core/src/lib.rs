//! Interference mappings on the nonnegative orthant.
//!
//! The crate covers asymptotic mappings, nonlinear spectral radii,
//! conditional eigenvalue problems solved by normalized fixed-point
//! iteration, fixed-point existence tests, the canonical max-min utility
//! problem with its budget sweeps, and the load-coupled downlink model.
//!
//! ```
//! use std::sync::Arc;
//! use ifmap::{has_fixed_point, LimitSchedule, LogSqrtMapping, MonotoneNorm, SharedMapping, SolverConfig};
//!
//! let t: SharedMapping = Arc::new(LogSqrtMapping::new(0.5).unwrap());
//! let schedule = LimitSchedule::default();
//! let out = has_fixed_point(&t, &schedule, &MonotoneNorm::linf(), &SolverConfig::default()).unwrap();
//! assert!(out.verdict.is_exists());
//! assert!((out.rho - 0.5).abs() < 1e-6);
//! ```

pub mod asymptotic;
pub mod axioms;
pub mod cli;
pub mod error;
pub mod feasibility;
pub mod loadmodel;
pub mod mapping;
pub mod matrix;
pub mod maxmin;
pub mod norm;
pub mod spectral;
pub mod vector;

pub use asymptotic::{derive_asymptotic, AsymptoticForm, AsymptoticMapping, LimitEvaluation, LimitSchedule};
pub use axioms::{check_axioms, Axiom, AxiomReport, AxiomResult, Witness};
pub use error::{Error, Result};
pub use feasibility::{
    compute_fixed_point, constrained_feasibility, has_fixed_point, BallVerdict, ConstrainedFeasibility, ExistenceCheck,
    ExistenceMethod, ExistenceVerdict, FixedPointResult, MonotoneDirection,
};
pub use loadmodel::{
    asymptotic_power_mapping, capped_load_mapping, coupling_matrix, load_mapping, maxmin_rate, power_mapping,
    power_mapping_for_load, rate_per_block, LoadMapping, MaxminRate, NetworkScenario, PowerMapping, ScenarioGenerator,
};
pub use mapping::{
    AffineMapping, FnMapping, InterferenceMapping, LogSqrtMapping, MappingClass, OffsetMapping, SharedMapping,
};
pub use matrix::{Matrix, PerronRoot};
pub use maxmin::{
    budget_grid, efficiency_bound, solve_canonical, sweep, transition_point, utility_bound, CanonicalProblem,
    CanonicalSolution, Sweep, SweepRow, TransitionPoint,
};
pub use norm::{MonotoneNorm, NormKind};
pub use spectral::{
    solve_conditional_eigenproblem, spectral_radius, spectral_radius_upper_via_budget, EigenSolution, RadiusStatus,
    SolverConfig, SpectralRadius,
};
pub use vector::NonnegVector;
