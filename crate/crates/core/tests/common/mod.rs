//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::LN_2;

use ifmap::{NetworkScenario, ScenarioGenerator};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

fn max_entry(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Spectral radius of a nonnegative matrix from Gelfand's formula,
/// `rho = lim ||A^m||^(1/m)`, with `m = 2^40` reached by repeated squaring.
pub fn rho_by_squaring(a: &Dense) -> f64 {
    let mut b = a.clone();
    let mut log_scale = 0.0;
    let mut power = 1.0;
    for _ in 0..40 {
        let s = max_entry(&b);
        if s == 0.0 {
            return 0.0;
        }
        for v in b.iter_mut().flatten() {
            *v /= s;
        }
        log_scale += s.ln();
        b = matmul(&b, &b);
        log_scale *= 2.0;
        power *= 2.0;
    }
    let s = max_entry(&b);
    if s == 0.0 {
        return 0.0;
    }
    ((log_scale + s.ln()) / power).exp()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Dense = a.iter().zip(b).map(|(row, &bi)| row.iter().copied().chain([bi]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let (top, rest) = m.split_at_mut(r);
            let f = rest[0][col] / top[col][col];
            for (a, b) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                *a -= f * b;
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// Random nonnegative matrix with about 30% zeros, rescaled to radius `rho`.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, rho: f64) -> Dense {
    loop {
        let a: Dense = (0..n)
            .map(|_| (0..n).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..1.0) }).collect())
            .collect();
        let r = rho_by_squaring(&a);
        if r > 1e-3 {
            return a.into_iter().map(|row| row.into_iter().map(|v| v * rho / r).collect()).collect();
        }
    }
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

pub fn sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn rel_err(x: &[f64], reference: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(reference).map(|(a, b)| a - b).collect();
    sup(&d) / sup(reference).max(f64::MIN_POSITIVE)
}

/// A seeded load-model scenario whose coupling straddles the feasibility
/// threshold.
pub fn heavy_scenario(seed: u64) -> NetworkScenario {
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed ^ 0x5eed);
    let g = ScenarioGenerator {
        num_bs: rng.random_range(2..=5),
        demand_bps: log_uniform(&mut rng, 3e6, 3e8),
        ..ScenarioGenerator::default()
    };
    g.generate(seed).expect("valid generator")
}

/// Users grouped by serving base station.
fn served(s: &NetworkScenario) -> Vec<Vec<usize>> {
    let mut users = vec![Vec::new(); s.num_bs];
    for (j, &i) in s.assignment.iter().enumerate() {
        users[i].push(j);
    }
    users
}

/// `M_ik = sum_j ln2 d_j g_kj / (K B g_ij)` written out directly.
pub fn coupling_oracle(s: &NetworkScenario) -> Dense {
    let kb = f64::from(s.resource_blocks) * s.bandwidth_hz;
    let users = served(s);
    (0..s.num_bs)
        .map(|i| {
            (0..s.num_bs)
                .map(|k| {
                    if i == k {
                        0.0
                    } else {
                        users[i].iter().map(|&j| LN_2 * s.demands_bps[j] * s.gains[k][j] / (kb * s.gains[i][j])).sum()
                    }
                })
                .collect()
        })
        .collect()
}

/// The power mapping at full load with noise `sigma2`, from first principles.
pub fn power_oracle(s: &NetworkScenario, p: &[f64], sigma2: f64) -> Vec<f64> {
    let k = f64::from(s.resource_blocks);
    let users = served(s);
    (0..s.num_bs)
        .map(|i| {
            users[i]
                .iter()
                .map(|&j| {
                    let interf: f64 =
                        (0..s.num_bs).filter(|&m| m != i).map(|m| p[m] * s.gains[m][j]).sum::<f64>() + sigma2;
                    let d = s.demands_bps[j];
                    if p[i] == 0.0 {
                        d * LN_2 * interf / (k * s.bandwidth_hz * s.gains[i][j])
                    } else {
                        let rate = s.bandwidth_hz * (p[i] * s.gains[i][j] / interf).ln_1p() / LN_2;
                        p[i] * d / (k * rate)
                    }
                })
                .sum()
        })
        .collect()
}

/// Collatz-Wielandt bracket of a monotone homogeneous map, refined by
/// normalized power iteration from the all-ones vector.
pub fn cw_radius(n: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> (f64, f64) {
    let mut x = vec![1.0; n];
    let mut best = (0.0_f64, f64::INFINITY);
    for _ in 0..100_000 {
        let y = f(&x);
        let ratios: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a / b).collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        best = (best.0.max(lo), best.1.min(hi));
        if best.1 - best.0 <= 1e-12 * best.1 {
            break;
        }
        let m = sup(&y);
        x = y.into_iter().map(|v| v / m).collect();
    }
    best
}
