//! Small dense real symmetric linear algebra for the solvers.

use num_complex::Complex;

use crate::matrix::CMatrix;

/// Row-major symmetric `n x n` real matrix.
#[derive(Clone, Debug)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let m = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, m);
                self.set(j, i, m);
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.n == 0 {
            return Vec::new();
        }
        let m = CMatrix::from_fn(self.n, |i, j| Complex::new(self.get(i, j), 0.0));
        m.jacobi_eigh().0
    }

    /// Eigenvalues (descending) with matching unit eigenvectors.
    pub fn eigen(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        if self.n == 0 {
            return (Vec::new(), Vec::new());
        }
        let m = CMatrix::from_fn(self.n, |i, j| Complex::new(self.get(i, j), 0.0));
        let (values, vectors) = m.jacobi_eigh();
        let cols = (0..self.n)
            .map(|j| {
                let v: Vec<f64> = vectors.column(j).iter().map(|z| z.re).collect();
                let nv = norm(&v);
                v.into_iter().map(|x| x / nv).collect()
            })
            .collect();
        (values, cols)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(f64::INFINITY)
    }

    /// Cholesky factor `L` (row-major, lower) or `None` if not positive definite.
    pub fn cholesky(&self) -> Option<Vec<f64>> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Some(l)
    }

    /// Solves `(A + shift) x = b`, raising a diagonal shift until the
    /// Cholesky factorization succeeds.
    pub fn solve_regularized(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let scale = (0..n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max).max(1e-300);
        let mut shift = 0.0;
        for _ in 0..200 {
            let mut a = self.clone();
            for i in 0..n {
                a.data[i * n + i] += shift;
            }
            if let Some(l) = a.cholesky() {
                return cholesky_solve(n, &l, b);
            }
            shift = if shift == 0.0 { 1e-14 * scale } else { shift * 10.0 };
        }
        vec![0.0; n]
    }
}

fn cholesky_solve(n: usize, l: &[f64], b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
