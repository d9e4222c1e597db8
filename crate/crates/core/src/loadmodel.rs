//! The load-coupled downlink model.
//!
//! Base station `i` serves the users `N_i` and spends a fraction `x_i` of its
//! `K` resource blocks. A block to user `j` carries
//! `omega_ij = B log2(1 + p_i g_ij / (sum_{k != i} x_k p_k g_kj + sigma2))`
//! bits per second, so the load needed to meet demands `d_j` is
//! `t_i(x) = sum_{j in N_i} d_j / (K omega_ij)`.

use std::f64::consts::LN_2;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{InterferenceMapping, MappingClass};
use crate::matrix::Matrix;
use crate::maxmin::{solve_canonical, CanonicalProblem};
use crate::norm::MonotoneNorm;
use crate::spectral::SolverConfig;

/// Powers below this use the zero-power branch of the power mapping.
pub const ZERO_POWER_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkScenario {
    pub num_bs: usize,
    pub num_users: usize,
    /// Serving base station of each user.
    pub assignment: Vec<usize>,
    /// `gains[i][j]`: linear pathloss gain from base station `i` to user `j`.
    pub gains: Vec<Vec<f64>>,
    pub demands_bps: Vec<f64>,
    pub resource_blocks: u32,
    pub bandwidth_hz: f64,
    /// Noise power per resource block.
    pub noise_w: f64,
    /// Transmit power per resource block of each base station.
    pub power_w: Option<Vec<f64>>,
    pub target_load: Option<Vec<f64>>,
    pub rate_cap_bps: Option<f64>,
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn check_positive_vec(name: &str, v: &[f64], len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::InvalidScenario(format!("{name} has {} entries, expected {len}", v.len())));
    }
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !positive(**x)) {
        return Err(Error::InvalidScenario(format!("{name}[{i}] = {x} must be positive and finite")));
    }
    Ok(())
}

impl NetworkScenario {
    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.num_bs, self.num_users);
        if m == 0 || n == 0 {
            return Err(Error::InvalidScenario("num_bs and num_users must be positive".into()));
        }
        if self.assignment.len() != n {
            return Err(Error::InvalidScenario(format!(
                "assignment has {} entries, expected {n}",
                self.assignment.len()
            )));
        }
        if let Some((j, &i)) = self.assignment.iter().enumerate().find(|(_, i)| **i >= m) {
            return Err(Error::InvalidScenario(format!("assignment[{j}] = {i} is not a base station index below {m}")));
        }
        for i in 0..m {
            if !self.assignment.contains(&i) {
                return Err(Error::InvalidScenario(format!("base station {i} serves no user")));
            }
        }
        if self.gains.len() != m {
            return Err(Error::InvalidScenario(format!("gains has {} rows, expected {m}", self.gains.len())));
        }
        for (i, row) in self.gains.iter().enumerate() {
            check_positive_vec(&format!("gains[{i}]"), row, n)?;
        }
        check_positive_vec("demands_bps", &self.demands_bps, n)?;
        if self.resource_blocks == 0 {
            return Err(Error::InvalidScenario("resource_blocks must be positive".into()));
        }
        if !positive(self.bandwidth_hz) {
            return Err(Error::InvalidScenario(format!("bandwidth_hz = {} must be positive", self.bandwidth_hz)));
        }
        if !positive(self.noise_w) {
            return Err(Error::InvalidScenario(format!("noise power {} must be positive", self.noise_w)));
        }
        if let Some(p) = &self.power_w {
            check_positive_vec("power_w", p, m)?;
        }
        if let Some(x) = &self.target_load {
            check_positive_vec("target_load", x, m)?;
        }
        if let Some(u) = self.rate_cap_bps {
            if !positive(u) {
                return Err(Error::InvalidScenario(format!("rate_cap_bps = {u} must be positive")));
            }
        }
        Ok(())
    }

    /// Users served by each base station, in increasing index order.
    pub fn users_by_bs(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_bs];
        for (j, &i) in self.assignment.iter().enumerate() {
            out[i].push(j);
        }
        out
    }

    fn powers(&self) -> Result<&[f64]> {
        self.power_w.as_deref().ok_or_else(|| Error::InvalidScenario("power_w is required for the load mapping".into()))
    }

    pub fn with_powers(mut self, p: Vec<f64>) -> Self {
        self.power_w = Some(p);
        self
    }

    pub fn with_rate_cap(mut self, cap: Option<f64>) -> Self {
        self.rate_cap_bps = cap;
        self
    }

    pub fn with_target_load(mut self, x: Vec<f64>) -> Self {
        self.target_load = Some(x);
        self
    }
}

#[derive(Debug)]
struct Model {
    s: NetworkScenario,
    users: Vec<Vec<usize>>,
}

impl Model {
    fn new(s: &NetworkScenario) -> Result<Arc<Self>> {
        s.validate()?;
        Ok(Arc::new(Self { users: s.users_by_bs(), s: s.clone() }))
    }

    fn k(&self) -> f64 {
        f64::from(self.s.resource_blocks)
    }

    /// `sum_{k != i} x_k p_k g_kj + sigma2`.
    fn interference(&self, i: usize, j: usize, x: &[f64], p: &[f64], sigma2: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.s.num_bs {
            if k != i {
                acc += x[k] * p[k] * self.s.gains[k][j];
            }
        }
        acc + sigma2
    }

    fn rate(&self, i: usize, j: usize, x: &[f64], p: &[f64], sigma2: f64) -> f64 {
        let sinr = p[i] * self.s.gains[i][j] / self.interference(i, j, x, p, sigma2);
        self.s.bandwidth_hz * sinr.ln_1p() / LN_2
    }
}

/// `omega_ij(x, p)` for a user `j` served by base station `i`.
pub fn rate_per_block(s: &NetworkScenario, i: usize, j: usize, x: &[f64]) -> Result<f64> {
    s.validate()?;
    let p = s.powers()?;
    if x.len() != s.num_bs {
        return Err(Error::DimensionMismatch { expected: s.num_bs, got: x.len() });
    }
    if j >= s.num_users || s.assignment[j] != i {
        return Err(Error::InvalidScenario(format!("user {j} is not served by base station {i}")));
    }
    let model = Model { users: Vec::new(), s: s.clone() };
    Ok(model.rate(i, j, x, p, s.noise_w))
}

/// The load mapping `t`, or its capped variant
/// `t_i(x) = sum_j max(d_j/(K omega_ij), d_j/u)`.
#[derive(Debug, Clone)]
pub struct LoadMapping {
    model: Arc<Model>,
    power: Vec<f64>,
    cap: Option<f64>,
}

pub fn load_mapping(s: &NetworkScenario) -> Result<LoadMapping> {
    let model = Model::new(s)?;
    let power = s.powers()?.to_vec();
    Ok(LoadMapping { model, power, cap: None })
}

pub fn capped_load_mapping(s: &NetworkScenario) -> Result<LoadMapping> {
    let cap = s
        .rate_cap_bps
        .ok_or_else(|| Error::InvalidScenario("rate_cap_bps is required for the capped load mapping".into()))?;
    let mut t = load_mapping(s)?;
    t.cap = Some(cap);
    Ok(t)
}

impl LoadMapping {
    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn cap(&self) -> Option<f64> {
        self.cap
    }
}

impl InterferenceMapping for LoadMapping {
    fn dim(&self) -> usize {
        self.model.s.num_bs
    }

    fn class(&self) -> MappingClass {
        if self.cap.is_some() {
            MappingClass::CappedLoadModel
        } else {
            MappingClass::LoadModel
        }
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = &self.model;
        let k = m.k();
        Ok((0..m.s.num_bs)
            .map(|i| {
                m.users[i]
                    .iter()
                    .map(|&j| {
                        let d = m.s.demands_bps[j];
                        let load = d / (k * m.rate(i, j, x, &self.power, m.s.noise_w));
                        match self.cap {
                            Some(u) => load.max(d / u),
                            None => load,
                        }
                    })
                    .sum()
            })
            .collect())
    }

    /// `diag(p)^-1 M diag(p)`; the cap term vanishes in the limit.
    fn linear_asymptote(&self) -> Option<Matrix> {
        let mut a = coupling_matrix(&self.model.s);
        let n = a.dim();
        for i in 0..n {
            for k in 0..n {
                a[(i, k)] *= self.power[k] / self.power[i];
            }
        }
        Some(a)
    }
}

/// The reverse mapping `H` from powers to powers for a fixed target load.
#[derive(Debug, Clone)]
pub struct PowerMapping {
    model: Arc<Model>,
    load: Vec<f64>,
    sigma2: f64,
}

/// `H` with the scenario's target load (all ones when absent).
pub fn power_mapping(s: &NetworkScenario) -> Result<PowerMapping> {
    let load = s.target_load.clone().unwrap_or_else(|| vec![1.0; s.num_bs]);
    power_mapping_for_load(s, load)
}

pub fn power_mapping_for_load(s: &NetworkScenario, load: Vec<f64>) -> Result<PowerMapping> {
    let model = Model::new(s)?;
    check_positive_vec("target load", &load, s.num_bs)?;
    Ok(PowerMapping { sigma2: model.s.noise_w, model, load })
}

/// `H` with zero noise, which is the asymptotic mapping of `H` and is GI.
pub fn asymptotic_power_mapping(s: &NetworkScenario) -> Result<PowerMapping> {
    let mut h = power_mapping(s)?;
    h.sigma2 = 0.0;
    Ok(h)
}

impl PowerMapping {
    pub fn load(&self) -> &[f64] {
        &self.load
    }

    pub fn noise(&self) -> f64 {
        self.sigma2
    }
}

impl InterferenceMapping for PowerMapping {
    fn dim(&self) -> usize {
        self.model.s.num_bs
    }

    fn class(&self) -> MappingClass {
        if self.sigma2 == 0.0 {
            MappingClass::Gi
        } else {
            MappingClass::PowerModel
        }
    }

    fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        let m = &self.model;
        let s = &m.s;
        let k = m.k();
        let x = &self.load;
        Ok((0..s.num_bs)
            .map(|i| {
                if p[i] >= ZERO_POWER_THRESHOLD {
                    let sum: f64 = m.users[i]
                        .iter()
                        .map(|&j| {
                            let w = m.rate(i, j, x, p, self.sigma2);
                            if w == f64::INFINITY {
                                0.0
                            } else {
                                s.demands_bps[j] / (k * w)
                            }
                        })
                        .sum();
                    p[i] / x[i] * sum
                } else {
                    m.users[i]
                        .iter()
                        .map(|&j| {
                            s.demands_bps[j] * LN_2 * m.interference(i, j, x, p, self.sigma2)
                                / (k * s.bandwidth_hz * s.gains[i][j] * x[i])
                        })
                        .sum()
                }
            })
            .collect())
    }
}

/// `M_ik = sum_{j in N_i} ln2 d_j g_kj / (K B g_ij)` off the diagonal, zero on it.
pub fn coupling_matrix(s: &NetworkScenario) -> Matrix {
    let m = s.num_bs;
    let users = s.users_by_bs();
    let kb = f64::from(s.resource_blocks) * s.bandwidth_hz;
    let mut a = Matrix::zeros(m);
    for i in 0..m {
        for k in 0..m {
            if i == k {
                continue;
            }
            a[(i, k)] = users[i].iter().map(|&j| LN_2 * s.demands_bps[j] * s.gains[k][j] / (kb * s.gains[i][j])).sum();
        }
    }
    a
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxminRate {
    pub budget: f64,
    pub powers: Vec<f64>,
    /// Common scaling `u` of the demand profile that all users achieve.
    pub rate: f64,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Maximizes the common rate under full load and `||p||_inf <= budget`.
///
/// The demands act as a profile: the returned `rate` is the largest `u`
/// such that demands `u d_j` are met with every base station at load one.
pub fn maxmin_rate(s: &NetworkScenario, budget: f64, cfg: &SolverConfig) -> Result<MaxminRate> {
    let h = power_mapping_for_load(s, vec![1.0; s.num_bs])?;
    let prob = CanonicalProblem::single_norm(Arc::new(h), MonotoneNorm::linf())?;
    let sol = solve_canonical(&prob, budget, cfg)?;
    Ok(MaxminRate {
        budget,
        powers: sol.power.into_vec(),
        rate: sol.utility,
        lambda: sol.lambda,
        residual: sol.residual,
        iterations: sol.iterations,
    })
}

/// Seeded synthetic scenarios.
///
/// Base stations sit on a square grid; each serves users placed uniformly in
/// its own grid cell. Gains follow `PL(dB) = intercept + 10 exponent
/// log10(d)` with `d` in metres, clamped below at 10 m. Demands are drawn
/// uniformly in `[0.5, 1.5] * demand_bps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGenerator {
    pub num_bs: usize,
    pub users_per_bs: (usize, usize),
    pub spacing_m: f64,
    pub pathloss_intercept_db: f64,
    pub pathloss_exponent: f64,
    pub demand_bps: f64,
    pub resource_blocks: u32,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub power_w: f64,
}

impl Default for ScenarioGenerator {
    fn default() -> Self {
        Self {
            num_bs: 5,
            users_per_bs: (2, 4),
            spacing_m: 200.0,
            pathloss_intercept_db: 38.0,
            pathloss_exponent: 3.5,
            demand_bps: 1e6,
            resource_blocks: 50,
            bandwidth_hz: 180e3,
            noise_psd_dbm_hz: -154.0,
            power_w: 1.0,
        }
    }
}

/// Watts per hertz from dBm per hertz.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl ScenarioGenerator {
    pub fn generate(&self, seed: u64) -> Result<NetworkScenario> {
        let (lo, hi) = self.users_per_bs;
        if self.num_bs == 0 || lo == 0 || hi < lo {
            return Err(Error::InvalidConfig("generator needs num_bs > 0 and 0 < min users <= max users".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols = (self.num_bs as f64).sqrt().ceil() as usize;
        let sites: Vec<(f64, f64)> = (0..self.num_bs)
            .map(|i| ((i % cols) as f64 * self.spacing_m, (i / cols) as f64 * self.spacing_m))
            .collect();
        let mut assignment = Vec::new();
        let mut positions = Vec::new();
        let mut demands = Vec::new();
        let half = 0.5 * self.spacing_m;
        for (i, &(bx, by)) in sites.iter().enumerate() {
            let count = rng.random_range(lo..=hi);
            for _ in 0..count {
                assignment.push(i);
                positions.push((bx + rng.random_range(-half..half), by + rng.random_range(-half..half)));
                demands.push(self.demand_bps * rng.random_range(0.5..1.5));
            }
        }
        let gains = sites
            .iter()
            .map(|&(bx, by)| {
                positions
                    .iter()
                    .map(|&(ux, uy)| {
                        let d = ((ux - bx).powi(2) + (uy - by).powi(2)).sqrt().max(10.0);
                        let pl_db = self.pathloss_intercept_db + 10.0 * self.pathloss_exponent * d.log10();
                        10f64.powf(-pl_db / 10.0)
                    })
                    .collect()
            })
            .collect();
        let s = NetworkScenario {
            num_bs: self.num_bs,
            num_users: assignment.len(),
            assignment,
            gains,
            demands_bps: demands,
            resource_blocks: self.resource_blocks,
            bandwidth_hz: self.bandwidth_hz,
            noise_w: dbm_to_watts(self.noise_psd_dbm_hz) * self.bandwidth_hz,
            power_w: Some(vec![self.power_w; self.num_bs]),
            target_load: None,
            rate_cap_bps: None,
        };
        s.validate()?;
        Ok(s)
    }
}
