//! Small dense square matrices and the Perron root of nonnegative matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidConfig("matrix must have at least one row".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|v| v.is_finite() && *v >= 0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|v| v * factor).collect() }
    }

    /// Perron root of a nonnegative matrix.
    ///
    /// The matrix is split into strongly connected components of its
    /// sparsity graph; the spectral radius is the largest Perron root of the
    /// irreducible diagonal blocks. Each block is handled by shifted power
    /// iteration with Collatz-Wielandt bounds, which bracket the root for any
    /// positive vector and close up because an irreducible block has a
    /// positive Perron vector.
    pub fn perron_root(&self, rel_tol: f64, max_iter: usize) -> Result<PerronRoot> {
        if !self.is_nonnegative() {
            return Err(Error::InvalidConfig("matrix must be finite and nonnegative".into()));
        }
        let mut best = PerronRoot { value: 0.0, lower: 0.0, upper: 0.0, iterations: 0 };
        for comp in strongly_connected_components(self) {
            let root = if comp.len() == 1 {
                let v = self[(comp[0], comp[0])];
                PerronRoot { value: v, lower: v, upper: v, iterations: 0 }
            } else {
                let block = self.submatrix(&comp);
                block.irreducible_root(rel_tol, max_iter)?
            };
            best.iterations += root.iterations;
            if root.value > best.value {
                best = PerronRoot { iterations: best.iterations, ..root };
            }
        }
        Ok(best)
    }

    fn submatrix(&self, idx: &[usize]) -> Matrix {
        let n = idx.len();
        let mut data = Vec::with_capacity(n * n);
        for &i in idx {
            for &j in idx {
                data.push(self[(i, j)]);
            }
        }
        Matrix { n, data }
    }

    fn irreducible_root(&self, rel_tol: f64, max_iter: usize) -> Result<PerronRoot> {
        let n = self.n;
        let row_sums: Vec<f64> = (0..n).map(|i| self.row(i).iter().sum()).collect();
        let lo_sum = row_sums.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi_sum = row_sums.iter().cloned().fold(0.0, f64::max);
        if hi_sum == 0.0 {
            return Ok(PerronRoot { value: 0.0, lower: 0.0, upper: 0.0, iterations: 0 });
        }
        // Iterate on A + shift*I, with the shift between the extreme row sums.
        let shift = 0.5 * (lo_sum + hi_sum);
        let mut x = vec![1.0; n];
        let mut lower = lo_sum;
        let mut upper = hi_sum;
        for it in 1..=max_iter {
            let ax = self.mul_vec(&x);
            let mut lo = f64::INFINITY;
            let mut hi = 0.0_f64;
            for i in 0..n {
                let r = ax[i] / x[i];
                lo = lo.min(r);
                hi = hi.max(r);
            }
            lower = lower.max(lo);
            upper = upper.min(hi);
            if upper - lower <= rel_tol * upper {
                return Ok(PerronRoot { value: 0.5 * (lower + upper), lower, upper, iterations: it });
            }
            let mut y: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a + shift * b).collect();
            let s = y.iter().cloned().fold(0.0, f64::max);
            y.iter_mut().for_each(|v| *v /= s);
            // Clamp to a strictly positive iterate.
            if y.iter().any(|v| *v <= 0.0) {
                y.iter_mut().for_each(|v| *v = v.max(f64::MIN_POSITIVE));
            }
            x = y;
        }
        Err(Error::NotConverged {
            what: "Perron root power iteration",
            iterations: max_iter,
            last_change: upper - lower,
        })
    }
}

/// Perron root with its certified Collatz-Wielandt bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerronRoot {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Tarjan's algorithm on the graph with an edge i -> j whenever a_ij > 0.
fn strongly_connected_components(m: &Matrix) -> Vec<Vec<usize>> {
    struct State {
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }

    fn visit(m: &Matrix, v: usize, s: &mut State) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for w in 0..m.dim() {
            if m[(v, w)] <= 0.0 {
                continue;
            }
            match s.index[w] {
                None => {
                    visit(m, w, s);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            while let Some(w) = s.stack.pop() {
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            s.out.push(comp);
        }
    }

    let n = m.dim();
    let mut s = State {
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(m, v, &mut s);
        }
    }
    s.out
}
