//! Dense symmetric matrices and Cholesky factorization.
//!
//! The information matrices handled here are small (at most a few hundred
//! rows), so a plain row-major layout with an unblocked Cholesky is entirely
//! adequate and keeps the numerical path easy to audit.

use serde::{Deserialize, Serialize};

/// Dense square matrix, row-major. Constructors keep it symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Option<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return None;
            }
            data.extend_from_slice(row);
        }
        let m = SymMatrix { n, data };
        (m.max_asymmetry() <= 1e-8).then_some(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    /// Add `v` to entries `(i, j)` and `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
        if i != j {
            self.data[j * self.n + i] += v;
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs_diag(&self) -> f64 {
        (0..self.n).fold(0.0, |m, i| m.max(self.get(i, i).abs()))
    }

    /// `self + lambda * I`.
    pub fn with_ridge(&self, lambda: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += lambda;
        }
        out
    }

    /// Lower-triangular Cholesky factor, or `None` if the matrix is not
    /// positive definite.
    pub fn cholesky(&self) -> Option<Cholesky> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return None;
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Some(Cholesky { n, l })
    }

    /// Quadratic form `v' M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.n);
        let mut total = 0.0;
        for (i, vi) in v.iter().enumerate() {
            let row: f64 = self.data[i * self.n..(i + 1) * self.n]
                .iter()
                .zip(v)
                .map(|(m, vj)| m * vj)
                .sum();
            total += vi * row;
        }
        total
    }
}

/// Lower-triangular Cholesky factor `L` with `L L' = M`.
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Solve `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        let l = &self.l;
        let mut x = b.to_vec();
        // forward: L y = b
        for i in 0..n {
            for k in 0..i {
                x[i] -= l[i * n + k] * x[k];
            }
            x[i] /= l[i * n + i];
        }
        // backward: L' x = y
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= l[k * n + i] * x[k];
            }
            x[i] /= l[i * n + i];
        }
        x
    }

    /// Inverse of the factored matrix.
    pub fn inverse(&self) -> SymMatrix {
        let n = self.n;
        let mut out = SymMatrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for (i, value) in col.iter().enumerate() {
                out.data[i * n + j] = *value;
            }
        }
        // symmetrize against round-off
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (out.get(i, j) + out.get(j, i));
                out.set(i, j, v);
            }
        }
        out
    }
}
