//! Sampled verification of the interference-function axioms.
//!
//! A pass means no counterexample was found on the sampled points; it is
//! evidence, not proof. A failure carries a concrete witness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{apply_checked, InterferenceMapping};

/// Scaling factors used by the scalability and homogeneity checks.
pub const SCALING_FACTORS: [f64; 3] = [1.5, 2.0, 10.0];

/// Relative margin for strict inequalities and for equality checks.
pub const STRICT_MARGIN: f64 = 1e-12;

const LOG_LOW: f64 = -3.0;
const LOG_HIGH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// P4: `x <= y` implies `T(x) <= T(y)`.
    Monotonicity,
    /// P1: `alpha T(x) > T(alpha x)` for `alpha > 1`.
    Scalability,
    /// P2: `alpha T(x) >= T(alpha x)` for `alpha > 1`.
    WeakScalability,
    /// P3: `T(alpha x) = alpha T(x)`.
    Homogeneity,
    /// `T(x) > 0` for every `x >= 0`.
    Positivity,
}

impl Axiom {
    pub const ALL: [Axiom; 5] =
        [Axiom::Monotonicity, Axiom::Scalability, Axiom::WeakScalability, Axiom::Homogeneity, Axiom::Positivity];

    pub fn label(self) -> &'static str {
        match self {
            Axiom::Monotonicity => "P4 monotonicity",
            Axiom::Scalability => "P1 scalability",
            Axiom::WeakScalability => "P2 weak scalability",
            Axiom::Homogeneity => "P3 homogeneity",
            Axiom::Positivity => "positivity",
        }
    }
}

/// A sampled counterexample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    /// Second point of a monotonicity pair.
    pub y: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub coordinate: usize,
    /// The two sides of the violated relation at `coordinate`.
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomResult {
    pub axiom: Axiom,
    pub passed: bool,
    pub checks: usize,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub seed: u64,
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn get(&self, axiom: Axiom) -> &AxiomResult {
        self.results.iter().find(|r| r.axiom == axiom).expect("every axiom is reported")
    }

    pub fn passed(&self, axiom: Axiom) -> bool {
        self.get(axiom).passed
    }

    /// Total number of coordinatewise comparisons performed.
    pub fn total_checks(&self) -> usize {
        self.results.iter().map(|r| r.checks).sum()
    }
}

struct Tally {
    axiom: Axiom,
    checks: usize,
    witness: Option<Witness>,
}

impl Tally {
    fn new(axiom: Axiom) -> Self {
        Self { axiom, checks: 0, witness: None }
    }

    fn record(&mut self, ok: bool, make: impl FnOnce() -> Witness) {
        self.checks += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(make());
        }
    }

    fn finish(self) -> AxiomResult {
        AxiomResult { axiom: self.axiom, passed: self.witness.is_none(), checks: self.checks, witness: self.witness }
    }
}

/// Checks P1-P4 and positivity on `samples` seeded random points.
///
/// Entries are drawn log-uniformly in `[1e-3, 1e3]`, with roughly one entry
/// in five set to zero so that boundary points are exercised. A few fixed
/// probes (the origin against scaled unit vectors and the all-twos vector)
/// run before the random ones.
pub fn check_axioms(t: &dyn InterferenceMapping, samples: usize, seed: u64) -> Result<AxiomReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least 1".into()));
    }
    let n = t.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut mono = Tally::new(Axiom::Monotonicity);
    let mut scal = Tally::new(Axiom::Scalability);
    let mut weak = Tally::new(Axiom::WeakScalability);
    let mut homo = Tally::new(Axiom::Homogeneity);
    let mut pos = Tally::new(Axiom::Positivity);

    let zero = vec![0.0; n];
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .map(|i| {
            let mut y = zero.clone();
            y[i] = 2.0;
            (zero.clone(), y)
        })
        .collect();
    pairs.push((zero.clone(), vec![2.0; n]));

    for _ in 0..samples {
        let x = sample_point(&mut rng, n);
        let y: Vec<f64> =
            x.iter().map(|v| if rng.random_bool(0.3) { *v } else { v + sample_entry(&mut rng) }).collect();
        pairs.push((x, y));
    }

    for (x, y) in &pairs {
        let tx = apply_checked(t, x)?;
        let ty = apply_checked(t, y)?;
        for i in 0..n {
            let ok = tx[i] <= ty[i] + STRICT_MARGIN * ty[i].abs();
            mono.record(ok, || Witness {
                x: x.clone(),
                y: Some(y.clone()),
                alpha: None,
                coordinate: i,
                lhs: tx[i],
                rhs: ty[i],
            });
        }
        for (p, tp) in [(x, &tx), (y, &ty)] {
            for (i, &v) in tp.iter().enumerate() {
                pos.record(v > 0.0, || Witness { x: p.clone(), y: None, alpha: None, coordinate: i, lhs: v, rhs: 0.0 });
            }
        }
        for &alpha in &SCALING_FACTORS {
            let ax: Vec<f64> = x.iter().map(|v| alpha * v).collect();
            let tax = apply_checked(t, &ax)?;
            for i in 0..n {
                let lhs = alpha * tx[i];
                let rhs = tax[i];
                let margin = STRICT_MARGIN * lhs.abs().max(rhs.abs());
                let w = || Witness { x: x.clone(), y: None, alpha: Some(alpha), coordinate: i, lhs, rhs };
                scal.record(lhs - rhs > margin, w);
                weak.record(lhs - rhs >= -margin, w);
                homo.record((lhs - rhs).abs() <= margin, w);
            }
        }
    }

    Ok(AxiomReport {
        samples,
        seed,
        results: vec![mono.finish(), scal.finish(), weak.finish(), homo.finish(), pos.finish()],
    })
}

fn sample_entry(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.random_range(LOG_LOW..=LOG_HIGH))
}

fn sample_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| if rng.random_bool(0.2) { 0.0 } else { sample_entry(rng) }).collect()
}
