//! Command-line front end: scenario ingestion, dispatch and report emission.
//!
//! Exit codes: 0 on success, 1 on parse, input or solver failure, 2 when a
//! fixed point was requested but none exists.

pub mod report;
pub mod scenario;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::asymptotic::{derive_asymptotic, LimitSchedule};
use crate::axioms::check_axioms;
use crate::error::{Error, Result};
use crate::feasibility::{compute_fixed_point, has_fixed_point, ExistenceVerdict};
use crate::loadmodel::{
    asymptotic_power_mapping, capped_load_mapping, load_mapping, power_mapping, power_mapping_for_load,
};
use crate::mapping::SharedMapping;
use crate::maxmin::{budget_grid, solve_canonical, sweep, CanonicalProblem};
use crate::norm::MonotoneNorm;
use crate::spectral::{spectral_radius, RadiusStatus, SolverConfig};

pub use report::{emit_report, Format, Payload, Report};
pub use scenario::{load_scenario, parse_scenario, resolve_target, ScenarioFile, Target};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ifmap", version, about = "Feasibility, spectral radii and max-min utility for interference mappings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a fixed point exists from the spectral radius of the asymptotic mapping.
    Feasibility(Common),
    /// Compute the fixed point by plain iteration from the origin.
    FixedPoint(Common),
    /// Spectral radius of the asymptotic mapping.
    SpectralRadius(Common),
    /// Solve the max-min utility problem at one budget.
    Maxmin {
        #[command(flatten)]
        common: Common,
        /// Power budget (watts for network scenarios).
        #[arg(long)]
        budget: f64,
    },
    /// Solve the max-min problem over a budget grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Grid "a:b:n" (linear) or "a:b:nlog" (log-spaced).
        #[arg(long)]
        budgets: String,
    },
    /// Check the interference axioms on sampled points.
    VerifyAxioms {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    L1,
    Linf,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario JSON file, or builtin:affine-1d, builtin:log-sqrt[:alpha=A], builtin:grid5[:seed=S].
    #[arg(long)]
    pub scenario: String,
    #[arg(long, value_enum, default_value = "linf")]
    pub norm: NormArg,
    /// Use the rate-capped load mapping (network scenarios with rate_cap_bps).
    #[arg(long)]
    pub capped: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads for sweeps; defaults to the number of CPUs.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Common {
    fn cfg(&self) -> SolverConfig {
        SolverConfig::default().with_tol(self.tol).with_max_iter(self.max_iter)
    }

    fn norm(&self, dim: usize) -> Result<MonotoneNorm> {
        let n = match self.norm {
            NormArg::L1 => MonotoneNorm::l1(),
            NormArg::Linf => MonotoneNorm::linf(),
        };
        n.check_dim(dim)?;
        Ok(n)
    }
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Feasibility(c) | Command::FixedPoint(c) | Command::SpectralRadius(c) => c,
            Command::Maxmin { common, .. } | Command::Sweep { common, .. } | Command::VerifyAxioms { common, .. } => {
                common
            }
        }
    }
}

/// Parses `"a:b:n"` or `"a:b:nlog"`.
pub fn parse_budgets(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(Error::Parse(format!("budget grid `{spec}` must look like a:b:n or a:b:nlog")));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("invalid number `{s}` in `{spec}`")));
    let (count, log) = match n.strip_suffix("log") {
        Some(c) => (c, true),
        None => (*n, false),
    };
    let count: usize = count.parse().map_err(|_| Error::Parse(format!("invalid point count `{n}` in `{spec}`")))?;
    budget_grid(num(a)?, num(b)?, count, log)
}

/// The mapping a network command operates on: the load mapping (capped on
/// request) for feasibility questions.
fn load_target(target: &Target, capped: bool) -> Result<(String, SharedMapping)> {
    match target {
        Target::Mapping { name, mapping } => {
            if capped {
                return Err(Error::InvalidConfig("--capped applies to network scenarios only".into()));
            }
            Ok((name.clone(), mapping.clone()))
        }
        Target::Network(s) if capped => Ok(("capped load mapping".into(), Arc::new(capped_load_mapping(s)?))),
        Target::Network(s) => Ok(("load mapping".into(), Arc::new(load_mapping(s)?))),
    }
}

/// The mapping a utility command optimizes: the full-load power mapping for
/// networks.
fn utility_target(target: &Target) -> Result<(String, SharedMapping)> {
    match target {
        Target::Mapping { name, mapping } => Ok((name.clone(), mapping.clone())),
        Target::Network(s) => {
            Ok(("power mapping at full load".into(), Arc::new(power_mapping_for_load(s, vec![1.0; s.num_bs])?)))
        }
    }
}

struct Outcome {
    payload: Payload,
    diagnostics: serde_json::Value,
    code: i32,
}

fn execute(cmd: &Command, target: &Target) -> Result<Outcome> {
    let common = cmd.common();
    let cfg = common.cfg();
    let schedule = LimitSchedule::default();
    match cmd {
        Command::Feasibility(_) => {
            let (name, t) = load_target(target, common.capped)?;
            let chk = has_fixed_point(&t, &schedule, &common.norm(t.dim())?, &cfg)?;
            Ok(Outcome {
                payload: Payload::Feasibility(report::FeasibilityResult {
                    rho: chk.rho,
                    feasible: chk.verdict.as_bool(),
                    boundary_inconclusive: chk.verdict == ExistenceVerdict::BoundaryInconclusive,
                }),
                diagnostics: json!({
                    "mapping": name,
                    "class": t.class(),
                    "rho_lower": chk.rho_lower,
                    "rho_upper": chk.rho_upper,
                    "method": chk.method,
                }),
                code: EXIT_OK,
            })
        }
        Command::FixedPoint(_) => {
            let (name, t) = load_target(target, common.capped)?;
            let fp = compute_fixed_point(t.as_ref(), &cfg)?;
            Ok(Outcome {
                code: if fp.exists { EXIT_OK } else { EXIT_INFEASIBLE },
                diagnostics: json!({
                    "mapping": name,
                    "monotone_direction": fp.monotone_direction,
                    "divergence_ceiling": cfg.divergence_ceiling,
                }),
                payload: Payload::FixedPoint(report::FixedPointOut {
                    exists: fp.exists,
                    point: fp.point.map(|p| p.into_vec()),
                    residual: fp.residual,
                    iterations: fp.iterations,
                }),
            })
        }
        Command::SpectralRadius(_) => {
            let (name, t) = load_target(target, common.capped)?;
            let a = derive_asymptotic(&t, &schedule)?;
            let sr = spectral_radius(&a, &common.norm(t.dim())?, &cfg)?;
            Ok(Outcome {
                payload: Payload::SpectralRadius(report::RadiusOut {
                    rho: sr.value,
                    lower: sr.lower,
                    upper: sr.upper,
                    status: match sr.status {
                        RadiusStatus::Exact => "exact".into(),
                        RadiusStatus::NeedsBudgetMethod => "needs_budget_method".into(),
                    },
                }),
                diagnostics: json!({
                    "mapping": name,
                    "form": if a.matrix().is_some() { "linear" } else { "numeric" },
                    "iterations": sr.iterations,
                }),
                code: EXIT_OK,
            })
        }
        Command::Maxmin { budget, .. } => {
            let (name, t) = utility_target(target)?;
            let prob = CanonicalProblem::single_norm(t.clone(), common.norm(t.dim())?)?;
            let sol = solve_canonical(&prob, *budget, &cfg)?;
            Ok(Outcome {
                payload: Payload::Maxmin(report::MaxminOut {
                    budget: *budget,
                    powers: sol.power.as_slice().to_vec(),
                    utility: sol.utility,
                    lambda: sol.lambda,
                    residual: sol.residual,
                }),
                diagnostics: json!({ "mapping": name, "iterations": sol.iterations }),
                code: EXIT_OK,
            })
        }
        Command::Sweep { budgets, .. } => {
            let grid = parse_budgets(budgets)?;
            let (name, t) = utility_target(target)?;
            let prob = CanonicalProblem::single_norm(t.clone(), common.norm(t.dim())?)?;
            let run = || sweep(&prob, &grid, &cfg);
            let sw = match common.jobs {
                Some(j) => rayon::ThreadPoolBuilder::new()
                    .num_threads(j.max(1))
                    .build()
                    .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
                    .install(run)?,
                None => run()?,
            };
            let failed: Vec<String> = sw
                .rows
                .iter()
                .filter_map(|r| r.error.as_ref().map(|e| format!("budget {:e}: {e}", r.budget)))
                .collect();
            Ok(Outcome {
                code: if failed.is_empty() { EXIT_OK } else { EXIT_FAILURE },
                diagnostics: json!({
                    "mapping": name,
                    "rho_status": sw.rho_status,
                    "alpha": prob.alpha,
                    "warnings": sw.warnings,
                    "row_errors": failed,
                    "iterations": sw.rows.iter().map(|r| r.iterations).collect::<Vec<_>>(),
                }),
                payload: Payload::Sweep(report::SweepOut {
                    transition_point: sw.transition_point.value(),
                    rho_inf: sw.rho_inf,
                    rows: sw.rows,
                }),
            })
        }
        Command::VerifyAxioms { samples, .. } => {
            let mappings: Vec<(String, SharedMapping)> = match target {
                Target::Mapping { name, mapping } => vec![(name.clone(), mapping.clone())],
                Target::Network(s) => {
                    let mut v: Vec<(String, SharedMapping)> = Vec::new();
                    if s.power_w.is_some() {
                        v.push(("load mapping".into(), Arc::new(load_mapping(s)?)));
                        if s.rate_cap_bps.is_some() {
                            v.push(("capped load mapping".into(), Arc::new(capped_load_mapping(s)?)));
                        }
                    }
                    v.push(("power mapping".into(), Arc::new(power_mapping(s)?)));
                    v.push(("noiseless power mapping".into(), Arc::new(asymptotic_power_mapping(s)?)));
                    v
                }
            };
            let mut out = Vec::new();
            for (name, t) in mappings {
                let r = check_axioms(t.as_ref(), *samples, common.seed)?;
                out.push(report::MappingAxioms {
                    name,
                    class: t.class(),
                    samples: r.samples,
                    seed: r.seed,
                    results: r.results,
                });
            }
            Ok(Outcome {
                diagnostics: json!({ "note": "sampled checks are evidence, not proof" }),
                payload: Payload::Axioms(report::AxiomsOut { mappings: out }),
                code: EXIT_OK,
            })
        }
    }
}

fn command_echo(args: &[OsString]) -> String {
    args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>().join(" ")
}

/// Runs one invocation. Output goes to `stdout` (or `--output`), messages to
/// `stderr`; the return value is the process exit code.
pub fn run_command<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let common = cli.command.common();
    let result = resolve_target(&common.scenario).and_then(|target| {
        let outcome = execute(&cli.command, &target)?;
        let scenario = match &target {
            Target::Mapping { name, .. } => name.clone(),
            Target::Network(_) => common.scenario.clone(),
        };
        Ok((
            Report {
                command: command_echo(&args),
                scenario,
                scenario_digest: target.digest(),
                result: outcome.payload,
                diagnostics: outcome.diagnostics,
                timestamp: report::timestamp(),
            },
            outcome.code,
        ))
    });
    let (report, code) = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_FAILURE;
        }
    };
    let text = emit_report(&report, common.format);
    match &common.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return EXIT_FAILURE;
            }
        }
        None => {
            if let Err(e) = stdout.write_all(text.as_bytes()) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_FAILURE;
            }
        }
    }
    code
}
