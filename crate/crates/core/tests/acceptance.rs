//! Acceptance criteria AC1-AC8, one pass/fail line each.
//!
//! Built with `harness = false` so the summary lines are printed even when
//! the output of other test targets is captured.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use ifmap::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counts assertions and stops at the first failure.
#[derive(Default)]
struct Checks {
    count: usize,
}

impl Checks {
    fn ensure(&mut self, ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
        self.count += 1;
        if ok {
            Ok(())
        } else {
            Err(msg())
        }
    }
}

type Outcome = Result<String, String>;

/// Name, check and runtime limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn shared<T: InterferenceMapping + 'static>(t: T) -> SharedMapping {
    Arc::new(t)
}

fn matrix(a: &Dense) -> Matrix {
    Matrix::from_rows(a).unwrap()
}

fn err(e: Error) -> String {
    e.to_string()
}

const SCHEDULE: LimitSchedule = LimitSchedule { h0: 1.0, growth: 10.0, tol: 1e-9, max_steps: 40 };
const TIGHT: LimitSchedule = LimitSchedule { h0: 1.0, growth: 10.0, tol: 1e-14, max_steps: 60 };

fn ac1() -> Outcome {
    let mut c = Checks::default();
    let cfg = SolverConfig::default();
    for (alpha, expected) in
        [(0.0, true), (0.25, true), (0.5, true), (0.9, true), (0.99, true), (1.5, false), (3.0, false)]
    {
        let t = shared(LogSqrtMapping::new(alpha).map_err(err)?);
        let chk = has_fixed_point(&t, &SCHEDULE, &MonotoneNorm::linf(), &cfg).map_err(err)?;
        c.ensure(chk.verdict.as_bool() == Some(expected), || format!("alpha={alpha}: verdict {:?}", chk.verdict))?;
        c.ensure((chk.rho - alpha).abs() <= 1e-6, || format!("alpha={alpha}: rho={}", chk.rho))?;
    }
    Ok(format!("{} checks", c.count))
}

fn ac2() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = SolverConfig::default().with_tol(1e-13);
    let mut boundary = 0;
    for case in 0..200 {
        let n = rng.random_range(2..=6);
        let target = rng.random_range(0.2..2.0);
        let x = random_matrix(&mut rng, n, target);
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        let rho = rho_by_squaring(&x);
        if (rho - 1.0).abs() <= 1e-3 {
            boundary += 1;
            continue;
        }
        let t = shared(AffineMapping::new(matrix(&x), u.clone()).map_err(err)?);
        let chk = has_fixed_point(&t, &SCHEDULE, &MonotoneNorm::l1(), &cfg).map_err(err)?;
        c.ensure(chk.verdict.as_bool() == Some(rho < 1.0), || {
            format!("case {case}: oracle rho={rho}, verdict {:?} rho={}", chk.verdict, chk.rho)
        })?;
        if rho < 1.0 {
            let fp = compute_fixed_point(t.as_ref(), &cfg).map_err(err)?;
            c.ensure(fp.exists, || format!("case {case}: no fixed point at rho={rho}"))?;
            let i_minus_x: Dense =
                (0..n).map(|i| (0..n).map(|k| f64::from(u8::from(i == k)) - x[i][k]).collect()).collect();
            let oracle = gauss_solve(&i_minus_x, &u);
            let p = fp.point.unwrap().into_vec();
            let e = rel_err(&p, &oracle);
            c.ensure(e <= 1e-8, || format!("case {case}: relative error {e:e} at rho={rho}"))?;
        }
    }
    Ok(format!("{} checks, {boundary} boundary cases skipped", c.count))
}

fn ac3() -> Outcome {
    let mut c = Checks::default();
    let cfg = SolverConfig::default().with_tol(1e-13);
    let prob = CanonicalProblem::single_norm(shared(AffineMapping::scalar(0.5, 1.0).map_err(err)?), MonotoneNorm::l1())
        .map_err(err)?;
    for budget in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let sol = solve_canonical(&prob, budget, &cfg).map_err(err)?;
        let exact = budget / (0.5 * budget + 1.0);
        c.ensure((sol.utility - exact).abs() <= 1e-8 * exact, || format!("budget {budget}: U={}", sol.utility))?;
    }
    let (rho, _) = prob.asymptotic_radius(&cfg).map_err(err)?;
    let tp = transition_point(&prob, rho).map_err(err)?;
    c.ensure(tp == TransitionPoint::Defined { value: 2.0 }, || format!("transition point {tp:?}"))?;
    let p_t = 2.0;
    let t0 = 1.0;
    let ub = utility_bound(&prob, p_t, rho).map_err(err)?;
    c.ensure(ub == p_t / t0 && ub == 1.0 / rho, || format!("utility bound branches differ at p_T: {ub}"))?;
    let eb = efficiency_bound(&prob, p_t, rho).map_err(err)?;
    c.ensure(eb == 1.0 / t0 && eb == prob.alpha / (rho * p_t), || format!("efficiency bound branches differ: {eb}"))?;
    let u_t = solve_canonical(&prob, p_t, &cfg).map_err(err)?.utility;
    c.ensure(u_t <= ub && u_t / p_t <= eb, || "bounds violated at p_T".into())?;
    Ok(format!("{} checks", c.count))
}

fn ac4() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seed in 0..20 {
        let s = heavy_scenario(seed);
        let t: SharedMapping = Arc::new(load_mapping(&s).map_err(err)?);
        let a = AsymptoticMapping::numeric(&t, &SCHEDULE).map_err(err)?;
        let m = coupling_oracle(&s);
        let p = s.power_w.clone().unwrap();
        for _ in 0..10 {
            let x: Vec<f64> = (0..s.num_bs).map(|_| log_uniform(&mut rng, 1e-2, 1e2)).collect();
            let limit = a.evaluate_limit(&x).map_err(err)?;
            let oracle: Vec<f64> =
                (0..s.num_bs).map(|i| (0..s.num_bs).map(|k| m[i][k] * p[k] * x[k]).sum::<f64>() / p[i]).collect();
            let e = rel_err(&limit.value, &oracle);
            c.ensure(e <= 1e-6, || format!("scenario {seed}: relative gap {e:e}"))?;
        }
    }
    Ok(format!("{} checks", c.count))
}

fn ac5() -> Outcome {
    let mut c = Checks::default();
    let cfg = SolverConfig::default();
    let mut boundary = 0;
    let mut feasible = 0;
    for seed in 0..20 {
        let s = heavy_scenario(seed);
        let rho = rho_by_squaring(&coupling_oracle(&s));
        if (rho - 1.0).abs() <= 1e-3 {
            boundary += 1;
            continue;
        }
        feasible += usize::from(rho < 1.0);
        let plain: SharedMapping = Arc::new(load_mapping(&s).map_err(err)?);
        let base = has_fixed_point(&plain, &SCHEDULE, &MonotoneNorm::linf(), &cfg).map_err(err)?;
        c.ensure(base.verdict.as_bool() == Some(rho < 1.0), || format!("scenario {seed}: uncapped verdict"))?;
        let mean_demand = s.demands_bps.iter().sum::<f64>() / s.demands_bps.len() as f64;
        let kb = f64::from(s.resource_blocks) * s.bandwidth_hz;
        for cap in [0.5 * mean_demand, 10.0 * kb, 1e15] {
            let capped: SharedMapping =
                Arc::new(capped_load_mapping(&s.clone().with_rate_cap(Some(cap))).map_err(err)?);
            let chk = has_fixed_point(&capped, &SCHEDULE, &MonotoneNorm::linf(), &cfg).map_err(err)?;
            c.ensure(chk.verdict == base.verdict, || format!("scenario {seed}, cap {cap:e}: {:?}", chk.verdict))?;
            let numeric = AsymptoticMapping::numeric(&capped, &SCHEDULE).map_err(err)?;
            let sr = spectral_radius(&numeric, &MonotoneNorm::linf(), &cfg).map_err(err)?;
            c.ensure((sr.lower < 1.0) == (rho < 1.0) && (sr.upper < 1.0) == (rho < 1.0), || {
                format!("scenario {seed}, cap {cap:e}: numeric bracket [{}, {}] vs {rho}", sr.lower, sr.upper)
            })?;
            let fp = compute_fixed_point(capped.as_ref(), &cfg).map_err(err)?;
            c.ensure(fp.exists == (rho < 1.0), || {
                format!("scenario {seed}, cap {cap:e}: iteration exists={}", fp.exists)
            })?;
        }
    }
    Ok(format!("{} checks, {feasible} feasible, {boundary} boundary skipped", c.count))
}

fn ac6() -> Outcome {
    let mut c = Checks::default();
    let s = ifmap::cli::scenario::grid5(7).map_err(err)?;
    let h: SharedMapping = Arc::new(power_mapping(&s).map_err(err)?);
    let prob = CanonicalProblem::single_norm(h, MonotoneNorm::linf()).map_err(err)?;
    let budgets = budget_grid(1e-6, 1e3, 25, true).map_err(err)?;
    let sw = sweep(&prob, &budgets, &SolverConfig::default()).map_err(err)?;
    let rows = &sw.rows;
    c.ensure(rows.len() == 25 && rows.iter().all(|r| r.error.is_none()), || "sweep rows failed".into())?;
    for w in rows.windows(2) {
        c.ensure(w[1].utility > w[0].utility, || format!("U not increasing at {:e}", w[1].budget))?;
        c.ensure(w[1].efficiency <= w[0].efficiency * (1.0 + 1e-10), || format!("E increased at {:e}", w[1].budget))?;
    }
    for r in rows {
        c.ensure(r.utility <= r.utility_bound * (1.0 + 1e-9), || format!("U bound at {:e}", r.budget))?;
        c.ensure(r.efficiency <= r.efficiency_bound * (1.0 + 1e-9), || format!("E bound at {:e}", r.budget))?;
    }
    let n = s.num_bs;
    let (lo, hi) = cw_radius(n, |p| power_oracle(&s, p, 0.0));
    let rho = 0.5 * (lo + hi);
    c.ensure(hi - lo <= 1e-9 * hi, || format!("oracle bracket [{lo}, {hi}] did not close"))?;
    c.ensure((sw.rho_inf - rho).abs() <= 1e-6 * rho, || format!("sweep rho {} vs oracle {rho}", sw.rho_inf))?;
    for r in &rows[22..] {
        let gap = (r.utility * rho - 1.0).abs();
        c.ensure(gap <= 0.05, || format!("U at {:e} is {} vs 1/rho {}", r.budget, r.utility, 1.0 / rho))?;
        let pe = r.budget * r.efficiency;
        c.ensure(pe >= 0.5 / rho && pe <= 2.0 / rho, || format!("budget*E at {:e} is {pe}", r.budget))?;
    }
    let h0 = sup(&power_oracle(&s, &vec![0.0; n], s.noise_w));
    for r in &rows[..3] {
        let gap = (r.utility / r.budget * h0 - 1.0).abs();
        c.ensure(gap <= 0.05, || format!("U/budget at {:e} off by {gap}", r.budget))?;
    }
    Ok(format!("{} checks, rho(H_inf)={rho:.6}", c.count))
}

fn si_instance(rng: &mut ChaCha8Rng) -> (SharedMapping, f64) {
    let n = rng.random_range(2..=5);
    let rho = if rng.random_bool(0.8) { rng.random_range(0.1..0.95) } else { rng.random_range(1.05..1.5) };
    let x = random_matrix(rng, n, rho);
    let scale = log_uniform(rng, 1e-2, 1e1);
    let u: Vec<f64> = (0..n).map(|_| scale * rng.random_range(0.1..1.0)).collect();
    if rng.random_bool(0.5) {
        return (shared(AffineMapping::new(matrix(&x), u).unwrap()), rho);
    }
    let beta = scale * rng.random_range(0.05..0.5);
    let t = FnMapping::new(n, MappingClass::Si, move |p| {
        (0..n).map(|i| u[i] + beta * (1.0 + p[i]).sqrt() + (0..n).map(|k| x[i][k] * p[k]).sum::<f64>()).collect()
    });
    (shared(t), rho)
}

fn ac7() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = SolverConfig::default().with_tol(1e-12);
    let mut boundary = 0;
    let mut inside = 0;
    for case in 0..100 {
        let (t, rho) = si_instance(&mut rng);
        let norm = if case % 2 == 0 { MonotoneNorm::l1() } else { MonotoneNorm::linf() };
        let cf = constrained_feasibility(t.as_ref(), &norm, &cfg).map_err(err)?;
        let fp = compute_fixed_point(t.as_ref(), &cfg).map_err(err)?;
        c.ensure(fp.exists == (rho < 1.0), || format!("case {case}: existence at rho={rho}"))?;
        let direct = match &fp.point {
            Some(p) if fp.exists => {
                let size = norm.eval(p).map_err(err)?;
                if (size - 1.0).abs() <= 1e-6 {
                    boundary += 1;
                    continue;
                }
                size <= 1.0 + 1e-8
            }
            _ => false,
        };
        if cf.near_boundary {
            boundary += 1;
            continue;
        }
        inside += usize::from(direct);
        c.ensure((cf.verdict == BallVerdict::FeasibleWithinBall) == direct, || {
            format!("case {case}: lambda={} but direct test says {direct}", cf.lambda)
        })?;
    }
    c.ensure(inside > 10 && inside < 90, || format!("only {inside} instances inside the ball"))?;
    Ok(format!("{} checks, {inside} inside the ball, {boundary} boundary skipped", c.count))
}

fn bundled_mappings() -> Vec<(String, SharedMapping)> {
    let mut out: Vec<(String, SharedMapping)> =
        vec![("affine-1d".into(), shared(AffineMapping::scalar(0.5, 1.0).unwrap()))];
    for alpha in [0.0, 0.5, 0.99, 1.5, 3.0] {
        out.push((format!("log-sqrt {alpha}"), shared(LogSqrtMapping::new(alpha).unwrap())));
    }
    let s = ifmap::cli::scenario::grid5(7).unwrap();
    out.push(("grid5 load".into(), shared(load_mapping(&s).unwrap())));
    out.push(("grid5 capped load".into(), shared(capped_load_mapping(&s.clone().with_rate_cap(Some(5e5))).unwrap())));
    out.push(("grid5 power".into(), shared(power_mapping(&s).unwrap())));
    out
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| if rng.random_bool(0.1) { 0.0 } else { log_uniform(rng, 1e-3, 1e3) }).collect()
}

fn ac8() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = SolverConfig::default();

    // monotone norms
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        let w: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 0.1, 10.0)).collect();
        let norms = [
            MonotoneNorm::l1(),
            MonotoneNorm::linf(),
            MonotoneNorm::weighted_l1(w.clone()).unwrap(),
            MonotoneNorm::weighted_linf(w).unwrap(),
        ];
        let x = random_point(&mut rng, n);
        let y: Vec<f64> = x.iter().map(|v| v + rng.random_range(0.0..1.0)).collect();
        let (xv, yv) = (NonnegVector::new(x.clone()).unwrap(), NonnegVector::new(y).unwrap());
        for norm in &norms {
            let (nx, ny) = (norm.eval(&xv).unwrap(), norm.eval(&yv).unwrap());
            c.ensure(nx <= ny, || format!("{norm:?} not monotone"))?;
            let n3 = norm.eval(&xv.scaled(3.0)).unwrap();
            c.ensure((n3 - 3.0 * nx).abs() <= 1e-12 * n3.max(1.0), || format!("{norm:?} not homogeneous"))?;
        }
    }

    // axioms of the bundled mappings
    for (name, t) in bundled_mappings() {
        let report = check_axioms(t.as_ref(), 300, 11).map_err(err)?;
        for axiom in [Axiom::Monotonicity, Axiom::Scalability, Axiom::WeakScalability, Axiom::Positivity] {
            c.count += report.get(axiom).checks;
            c.ensure(report.passed(axiom), || format!("{name}: {axiom:?} witness {:?}", report.get(axiom).witness))?;
        }
    }

    // asymptotic mappings are monotone and homogeneous
    for (name, t) in bundled_mappings() {
        let a = AsymptoticMapping::numeric(&t, &SCHEDULE).map_err(err)?;
        let n = t.dim();
        for _ in 0..60 {
            let x = random_point(&mut rng, n);
            let y: Vec<f64> = x.iter().map(|v| v * rng.random_range(1.0..3.0)).collect();
            let ax = a.apply(&x).map_err(err)?;
            let ay = a.apply(&y).map_err(err)?;
            for i in 0..n {
                let slack = 1e-6 * ay[i] + 1e-8 * sup(&y);
                c.ensure(ax[i] <= ay[i] + slack, || format!("{name}: asymptote not monotone"))?;
            }
            let f = log_uniform(&mut rng, 1e-2, 1e2);
            let xf: Vec<f64> = x.iter().map(|v| v * f).collect();
            let axf = a.apply(&xf).map_err(err)?;
            for i in 0..n {
                let d = (axf[i] - f * ax[i]).abs();
                let slack = 1e-6 * f * ax[i] + 1e-8 * sup(&xf);
                c.ensure(d <= slack, || format!("{name}: asymptote not homogeneous"))?;
            }
        }
    }

    // plain iterates from the origin are nondecreasing
    for _ in 0..100 {
        let (t, rho) = si_instance(&mut rng);
        if rho >= 1.0 {
            continue;
        }
        let mut x = vec![0.0; t.dim()];
        for _ in 0..30 {
            let y = t.apply(&x).map_err(err)?;
            for i in 0..x.len() {
                c.ensure(y[i] >= x[i], || "plain iterate decreased".into())?;
            }
            x = y;
        }
        let fp = compute_fixed_point(t.as_ref(), &cfg).map_err(err)?;
        c.ensure(fp.monotone_direction == MonotoneDirection::Nondecreasing, || "direction".into())?;
    }

    // budget-method upper bounds are nonincreasing and stay above the radius
    let budgets: Vec<f64> = (0..=8).map(|k| 10f64.powi(k)).collect();
    for _ in 0..40 {
        let (t, rho) = si_instance(&mut rng);
        let ups = spectral_radius_upper_via_budget(t.as_ref(), &budgets, &MonotoneNorm::l1(), &cfg).map_err(err)?;
        for w in ups.windows(2) {
            c.ensure(w[1] <= w[0] * (1.0 + 1e-9), || format!("budget bounds increased: {ups:?}"))?;
        }
        for v in &ups {
            c.ensure(*v >= rho * (1.0 - 1e-9), || format!("budget bound {v} below radius {rho}"))?;
        }
    }

    // lambda ordering and upper-bound certificates
    for _ in 0..100 {
        let (t, _) = si_instance(&mut rng);
        let n = t.dim();
        let norm = MonotoneNorm::linf();
        let sol = solve_conditional_eigenproblem(t.as_ref(), &norm, &cfg).map_err(err)?;
        let a = derive_asymptotic(&t, &TIGHT).map_err(err)?;
        let sr = spectral_radius(&a, &norm, &cfg).map_err(err)?;
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-2, 1.0)).collect();
            let m = sup(&x);
            let x: Vec<f64> = x.iter().map(|v| v / m).collect();
            let tx = t.apply(&x).map_err(err)?;
            let lambda_lo = tx.iter().zip(&x).map(|(a, b)| a / b).fold(f64::INFINITY, f64::min);
            c.ensure(sol.lambda_star >= lambda_lo - 1e-9, || format!("lambda* {} < {lambda_lo}", sol.lambda_star))?;
            let ax = a.apply(&x).map_err(err)?;
            let lambda_hi = ax.iter().zip(&x).map(|(a, b)| a / b).fold(0.0, f64::max);
            c.ensure(sr.value <= lambda_hi + 1e-9, || {
                format!("radius {} above certificate {lambda_hi}: {sr:?}", sr.value)
            })?;
        }
    }

    let total = c.count;
    c.ensure(total >= 10_000, || format!("only {total} assertions"))?;
    Ok(format!("{} assertions", c.count))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1 log-sqrt feasibility table", ac1, 1),
        ("AC2 affine oracle equivalence", ac2, 10),
        ("AC3 one-dimensional closed form", ac3, 1),
        ("AC4 asymptotic mapping agreement", ac4, 5),
        ("AC5 capped and uncapped equivalence", ac5, 5),
        ("AC6 desk-scale budget sweep", ac6, 60),
        ("AC7 constrained feasibility", ac7, 10),
        ("AC8 invariant suites", ac8, 60),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed <= Duration::from_secs(limit) {
                Ok(msg)
            } else {
                Err(format!("exceeded {limit} s"))
            }
        });
        match outcome {
            Ok(msg) => println!("PASS {name} ({:.2} s): {msg}", elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name} ({:.2} s): {msg}", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
