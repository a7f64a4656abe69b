//! Block-diagonal matrix algebras and their self-adjoint elements.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::Real;

/// Default cap on the total matrix size `N = sum n_k`.
pub const MAX_TOTAL_DIM: usize = 16;

/// A direct sum of full complex matrix blocks `Mat(n_1) + ... + Mat(n_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Algebra {
    block_dims: Vec<usize>,
}

impl Algebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(block_dims, MAX_TOTAL_DIM)
    }

    pub fn with_cap(block_dims: Vec<usize>, cap: usize) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        if block_dims.contains(&0) {
            return Err(Error::InvalidAlgebra("zero-sized block".into()));
        }
        let total: usize = block_dims.iter().sum();
        if total > cap {
            return Err(Error::InvalidAlgebra(format!(
                "total dimension {total} exceeds cap {cap}"
            )));
        }
        Ok(Self { block_dims })
    }

    /// The commutative algebra `C^n`.
    pub fn abelian(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Total matrix size `N`, which is also `tr(1)`.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    /// Real dimension of the self-adjoint part.
    pub fn real_dim(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    pub fn is_abelian(&self) -> bool {
        self.block_dims.iter().all(|&n| n == 1)
    }
}

/// A self-adjoint element of an [`Algebra`], stored block by block.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian<T: Real> {
    algebra: Algebra,
    blocks: Vec<CMatrix<T>>,
}

impl<T: Real> Hermitian<T> {
    /// Symmetrizes `(a + a*) / 2`; rejects inputs whose anti-Hermitian part
    /// exceeds the scalar's rejection threshold.
    pub fn from_blocks(algebra: &Algebra, blocks: Vec<CMatrix<T>>) -> Result<Self> {
        check_shapes(algebra, &blocks)?;
        let worst = blocks
            .iter()
            .map(|b| b.anti_hermitian_norm())
            .fold(T::zero(), T::max);
        if worst > T::hermitian_reject() {
            return Err(Error::NotHermitian(worst.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self::from_blocks_symmetrized(algebra, blocks))
    }

    /// Row-major complex entries per block.
    pub fn from_block_entries(algebra: &Algebra, entries: Vec<Vec<Complex<T>>>) -> Result<Self> {
        if entries.len() != algebra.num_blocks() {
            return Err(Error::ShapeMismatch {
                expected: algebra.num_blocks(),
                got: entries.len(),
            });
        }
        let blocks = entries
            .into_iter()
            .zip(algebra.block_dims())
            .map(|(e, &n)| {
                let got = e.len();
                CMatrix::from_row_major(n, e).ok_or(Error::ShapeMismatch { expected: n * n, got })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(algebra, blocks)
    }

    pub(crate) fn from_blocks_symmetrized(algebra: &Algebra, blocks: Vec<CMatrix<T>>) -> Self {
        debug_assert!(check_shapes(algebra, &blocks).is_ok());
        Self {
            algebra: algebra.clone(),
            blocks: blocks.iter().map(CMatrix::hermitian_part).collect(),
        }
    }

    pub fn zero(algebra: &Algebra) -> Self {
        Self {
            algebra: algebra.clone(),
            blocks: algebra.block_dims().iter().map(|&n| CMatrix::zeros(n)).collect(),
        }
    }

    pub fn identity(algebra: &Algebra) -> Self {
        Self {
            algebra: algebra.clone(),
            blocks: algebra
                .block_dims()
                .iter()
                .map(|&n| CMatrix::identity(n))
                .collect(),
        }
    }

    /// Diagonal element; `diag` runs over the concatenated block diagonals.
    pub fn from_real_diagonal(algebra: &Algebra, diag: &[T]) -> Result<Self> {
        if diag.len() != algebra.dim() {
            return Err(Error::ShapeMismatch {
                expected: algebra.dim(),
                got: diag.len(),
            });
        }
        let mut offset = 0;
        let blocks = algebra
            .block_dims()
            .iter()
            .map(|&n| {
                let b = CMatrix::from_real_diagonal(&diag[offset..offset + n]);
                offset += n;
                b
            })
            .collect();
        Ok(Self {
            algebra: algebra.clone(),
            blocks,
        })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix<T>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix<T> {
        &self.blocks[k]
    }

    pub fn same_algebra(&self, other: &Self) -> Result<()> {
        if self.algebra == other.algebra {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch(
                self.algebra.block_dims().to_vec(),
                other.algebra.block_dims().to_vec(),
            ))
        }
    }

    /// Hilbert-Schmidt inner product; panics on mismatched algebras.
    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.algebra, other.algebra, "algebra mismatch");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .fold(T::zero(), |acc, (a, b)| acc + a.trace_product(b).re)
    }

    pub fn norm(&self) -> T {
        self.dot(self).max(T::zero()).sqrt()
    }

    pub fn trace(&self) -> T {
        self.blocks
            .iter()
            .fold(T::zero(), |acc, b| acc + b.trace().re)
    }

    /// `a - tr(a)/N * 1`.
    pub fn traceless_part(&self) -> Self {
        let shift = self.trace() / T::from_usize(self.algebra.dim()).unwrap();
        self - &Self::identity(&self.algebra).scale(shift)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map_blocks(|b| b.scale(s))
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        self + &other.scale(s)
    }

    pub fn shift(&self, s: T) -> Self {
        self + &Self::identity(&self.algebra).scale(s)
    }

    /// `p a p`, Hermitian whenever `p` is.
    pub fn sandwich(&self, p: &Self) -> Self {
        assert_eq!(self.algebra, p.algebra, "algebra mismatch");
        let blocks = p
            .blocks
            .iter()
            .zip(&self.blocks)
            .map(|(pb, ab)| pb.matmul(ab).matmul(pb).hermitian_part())
            .collect();
        Self {
            algebra: self.algebra.clone(),
            blocks,
        }
    }

    /// Hermitian part of the product `self * other`.
    pub fn jordan_product(&self, other: &Self) -> Self {
        assert_eq!(self.algebra, other.algebra, "algebra mismatch");
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.matmul(b).hermitian_part())
            .collect();
        Self {
            algebra: self.algebra.clone(),
            blocks,
        }
    }

    pub fn is_zero_within(&self, tol: T) -> bool {
        self.norm() <= tol
    }

    /// The full `N x N` block-diagonal matrix.
    pub fn to_dense(&self) -> CMatrix<T> {
        let n = self.algebra.dim();
        let mut out = CMatrix::zeros(n);
        let mut offset = 0;
        for b in &self.blocks {
            let m = b.dim();
            for i in 0..m {
                for j in 0..m {
                    out[(offset + i, offset + j)] = b[(i, j)];
                }
            }
            offset += m;
        }
        out
    }

    /// Concatenated row-major entries of all blocks.
    pub fn entries(&self) -> Vec<Complex<T>> {
        self.blocks
            .iter()
            .flat_map(|b| b.as_slice().iter().copied())
            .collect()
    }

    fn map_blocks(&self, f: impl Fn(&CMatrix<T>) -> CMatrix<T>) -> Self {
        Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&CMatrix<T>, &CMatrix<T>) -> CMatrix<T>) -> Self {
        assert_eq!(self.algebra, other.algebra, "algebra mismatch");
        Self {
            algebra: self.algebra.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

fn check_shapes<T: Real>(algebra: &Algebra, blocks: &[CMatrix<T>]) -> Result<()> {
    if blocks.len() != algebra.num_blocks() {
        return Err(Error::ShapeMismatch {
            expected: algebra.num_blocks(),
            got: blocks.len(),
        });
    }
    for (b, &n) in blocks.iter().zip(algebra.block_dims()) {
        if b.dim() != n {
            return Err(Error::ShapeMismatch {
                expected: n * n,
                got: b.dim() * b.dim(),
            });
        }
    }
    Ok(())
}

/// Hilbert-Schmidt inner product `tr(ab)`.
pub fn hs_inner<T: Real>(a: &Hermitian<T>, b: &Hermitian<T>) -> Result<T> {
    a.same_algebra(b)?;
    Ok(a.dot(b))
}

impl<T: Real> Add for &Hermitian<T> {
    type Output = Hermitian<T>;
    fn add(self, rhs: Self) -> Hermitian<T> {
        self.zip_blocks(rhs, CMatrix::add)
    }
}

impl<T: Real> Sub for &Hermitian<T> {
    type Output = Hermitian<T>;
    fn sub(self, rhs: Self) -> Hermitian<T> {
        self.zip_blocks(rhs, CMatrix::sub)
    }
}

impl<T: Real> Add for Hermitian<T> {
    type Output = Hermitian<T>;
    fn add(self, rhs: Self) -> Hermitian<T> {
        &self + &rhs
    }
}

impl<T: Real> Sub for Hermitian<T> {
    type Output = Hermitian<T>;
    fn sub(self, rhs: Self) -> Hermitian<T> {
        &self - &rhs
    }
}

impl<T: Real> Neg for &Hermitian<T> {
    type Output = Hermitian<T>;
    fn neg(self) -> Hermitian<T> {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for &Hermitian<T> {
    type Output = Hermitian<T>;
    fn mul(self, s: T) -> Hermitian<T> {
        self.scale(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit_plus_one() -> Algebra {
        Algebra::new(vec![2, 1]).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn algebra_validation() {
        assert!(Algebra::new(vec![]).is_err());
        assert!(Algebra::new(vec![2, 0]).is_err());
        assert!(Algebra::new(vec![16, 1]).is_err());
        let a = qubit_plus_one();
        assert_eq!(a.dim(), 3);
        assert_eq!(a.real_dim(), 5);
    }

    #[test]
    fn identity_inner_product_is_dimension() {
        let a = qubit_plus_one();
        let one = Hermitian::<f64>::identity(&a);
        assert_eq!(hs_inner(&one, &one).unwrap(), 3.0);
        assert_eq!(one.trace(), 3.0);
    }

    #[test]
    fn mismatched_algebras_rejected() {
        let x = Hermitian::<f64>::identity(&qubit_plus_one());
        let y = Hermitian::<f64>::identity(&Algebra::abelian(3).unwrap());
        assert!(matches!(hs_inner(&x, &y), Err(Error::AlgebraMismatch(..))));
    }

    #[test]
    fn constructor_symmetrizes_small_errors_and_rejects_large() {
        let a = qubit_plus_one();
        let ok = Hermitian::from_block_entries(
            &a,
            vec![vec![c(1., 0.), c(0.5, 1e-12), c(0.5, 0.), c(0., 0.)], vec![c(2., 0.)]],
        )
        .unwrap();
        assert_eq!(ok.block(0)[(0, 1)], ok.block(0)[(1, 0)].conj());
        let bad = Hermitian::from_block_entries(
            &a,
            vec![vec![c(1., 0.), c(0.5, 0.), c(0.0, 0.), c(0., 0.)], vec![c(2., 0.)]],
        );
        assert!(matches!(bad, Err(Error::NotHermitian(_))));
        let wrong = Hermitian::<f64>::from_block_entries(&a, vec![vec![c(1., 0.)], vec![c(2., 0.)]]);
        assert!(matches!(wrong, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn traceless_part_has_zero_trace() {
        let a = qubit_plus_one();
        let x = Hermitian::from_real_diagonal(&a, &[1.0f64, 2.0, 4.0]).unwrap();
        assert!(x.traceless_part().trace().abs() < 1e-15);
    }
}
