//! Dense square complex matrices and the cyclic Jacobi eigensolver.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Row-major `n x n` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T: Real> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds from row-major entries; `entries.len()` must be a perfect square.
    pub fn from_row_major(n: usize, entries: Vec<Complex<T>>) -> Option<Self> {
        (entries.len() == n * n).then_some(Self { n, data: entries })
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        debug_assert_eq!(n, other.n);
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z.scale(s)).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.n).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        let n = self.n;
        let mut acc = Complex::zero();
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)].conj()).scale(half))
    }

    /// Frobenius norm of `(A - A*) / 2`.
    pub fn anti_hermitian_norm(&self) -> T {
        let half = T::lit(0.5);
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += (self[(i, j)] - self[(j, i)].conj()).scale(half).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    /// `U diag(d) U*` for `U` with orthonormal columns `cols` (each of length n).
    pub fn spectral_sum(n: usize, cols: &[(T, &[Complex<T>])]) -> Self {
        let mut out = Self::zeros(n);
        for &(w, v) in cols {
            if w.is_zero() {
                continue;
            }
            for i in 0..n {
                let vi = v[i].scale(w);
                for j in 0..n {
                    out.data[i * n + j] += vi * v[j].conj();
                }
            }
        }
        out
    }

    /// Eigendecomposition of the Hermitian part by cyclic complex Jacobi rotations.
    ///
    /// Returns eigenvalues in descending order together with the matrix whose
    /// columns are the matching orthonormal eigenvectors.
    pub fn jacobi_eigh(&self) -> (Vec<T>, CMatrix<T>) {
        let n = self.n;
        let mut a = self.hermitian_part();
        let mut v = Self::identity(n);
        let scale = a.frobenius_norm();
        let threshold = T::jacobi_tol() * scale;

        for _sweep in 0..100 {
            if off_diagonal_norm(&a) <= threshold {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }

        let mut pairs: Vec<(T, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
        pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
        let values = pairs.iter().map(|&(l, _)| l).collect();
        let vectors = Self::from_fn(n, |i, j| v[(i, pairs[j].1)]);
        (values, vectors)
    }
}

fn off_diagonal_norm<T: Real>(a: &CMatrix<T>) -> T {
    let mut acc = T::zero();
    for i in 0..a.n {
        for j in 0..a.n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One unitary rotation `G = P J` zeroing `a[p][q]`, where `P` removes the
/// phase of `a[p][q]` and `J` is the real symmetric Jacobi rotation.
fn rotate<T: Real>(a: &mut CMatrix<T>, v: &mut CMatrix<T>, p: usize, q: usize) {
    let n = a.n;
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= T::min_positive_value() {
        return;
    }
    let phase = apq.unscale(mag);
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (T::lit(2.0) * mag);
    let t = if theta.is_infinite() {
        T::zero()
    } else {
        let sign = if theta >= T::zero() { T::one() } else { -T::one() };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    let g_pp = Complex::new(c, T::zero());
    let g_pq = Complex::new(s, T::zero());
    let g_qp = -phase.conj().scale(s);
    let g_qq = phase.conj().scale(c);

    // A <- A G and V <- V G (columns p, q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    // A <- G* A (rows p, q)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn jacobi_diagonalizes_pauli_y() {
        let m = CMatrix::from_row_major(2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        let (vals, _) = m.jacobi_eigh();
        assert!((vals[0] - 1.0).abs() < 1e-15);
        assert!((vals[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_reconstructs_complex_matrix() {
        let entries = vec![
            c(2.0, 0.0),
            c(0.3, -0.7),
            c(-1.1, 0.2),
            c(0.3, 0.7),
            c(-0.5, 0.0),
            c(0.4, 0.9),
            c(-1.1, -0.2),
            c(0.4, -0.9),
            c(1.0, 0.0),
        ];
        let m = CMatrix::from_row_major(3, entries).unwrap();
        let (vals, vecs) = m.jacobi_eigh();
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let cols: Vec<Vec<_>> = (0..3).map(|j| vecs.column(j)).collect();
        let parts: Vec<_> = vals.iter().zip(&cols).map(|(&l, v)| (l, v.as_slice())).collect();
        let back = CMatrix::spectral_sum(3, &parts);
        assert!(back.sub(&m).frobenius_norm() < 1e-13);
        let gram = vecs.adjoint().matmul(&vecs);
        assert!(gram.sub(&CMatrix::identity(3)).frobenius_norm() < 1e-13);
    }

    #[test]
    fn jacobi_on_zero_matrix() {
        let (vals, vecs) = CMatrix::<f64>::zeros(3).jacobi_eigh();
        assert!(vals.iter().all(|v| *v == 0.0));
        assert_eq!(vecs, CMatrix::identity(3));
    }

    #[test]
    fn jacobi_single_precision() {
        let m = CMatrix::<f32>::from_real_diagonal(&[1.0, 3.0, -2.0]);
        let (vals, _) = m.jacobi_eigh();
        assert_eq!(vals, vec![3.0, 1.0, -2.0]);
    }
}
