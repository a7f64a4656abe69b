//! Spectral calculus: eigendecomposition, matrix functions, Fréchet derivatives.

use num_complex::Complex;

use crate::algebra::{Algebra, Hermitian};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::Real;

/// Eigenvalues (descending) and eigenvector columns of one block.
#[derive(Clone, Debug)]
pub struct BlockSpectrum<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

/// Per-block spectral data of a [`Hermitian`] element.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    algebra: Algebra,
    blocks: Vec<BlockSpectrum<T>>,
}

/// One eigenpair, tagged with the block it lives in.
#[derive(Clone, Debug)]
pub struct Eigenpair<T: Real> {
    pub block: usize,
    pub value: T,
    pub vector: Vec<Complex<T>>,
}

impl<T: Real> Hermitian<T> {
    pub fn eigh(&self) -> Spectrum<T> {
        let blocks = self
            .blocks()
            .iter()
            .map(|b| {
                let (values, vectors) = b.jacobi_eigh();
                BlockSpectrum { values, vectors }
            })
            .collect();
        Spectrum {
            algebra: self.algebra().clone(),
            blocks,
        }
    }

    pub fn exp(&self) -> Hermitian<T> {
        self.eigh().map(T::exp)
    }

    pub fn ln(&self) -> Result<Hermitian<T>> {
        apply_matrix_function(self, &Ln)
    }
}

impl<T: Real> Spectrum<T> {
    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[BlockSpectrum<T>] {
        &self.blocks
    }

    /// All eigenvalues, merged and sorted descending.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut all: Vec<T> = self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        all.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        all
    }

    pub fn max(&self) -> T {
        self.blocks
            .iter()
            .filter_map(|b| b.values.first().copied())
            .fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.blocks
            .iter()
            .filter_map(|b| b.values.last().copied())
            .fold(T::infinity(), T::min)
    }

    pub fn eigenpairs(&self) -> impl Iterator<Item = Eigenpair<T>> + '_ {
        self.blocks.iter().enumerate().flat_map(|(k, b)| {
            b.values.iter().enumerate().map(move |(j, &value)| Eigenpair {
                block: k,
                value,
                vector: b.vectors.column(j),
            })
        })
    }

    /// `sum_i f(l_i) P_i`.
    pub fn map(&self, f: impl Fn(T) -> T) -> Hermitian<T> {
        self.weighted(|l| Some(f(l))).expect("total function")
    }

    /// Like [`Spectrum::map`] but `None` aborts the whole evaluation.
    pub fn weighted(&self, f: impl Fn(T) -> Option<T>) -> Option<Hermitian<T>> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let n = b.vectors.dim();
            let cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| b.vectors.column(j)).collect();
            let mut parts = Vec::with_capacity(n);
            for (l, v) in b.values.iter().zip(&cols) {
                parts.push((f(*l)?, v.as_slice()));
            }
            blocks.push(CMatrix::spectral_sum(n, &parts));
        }
        Some(Hermitian::from_blocks_symmetrized(&self.algebra, blocks))
    }

    /// Sum of the eigenprojectors whose eigenvalue satisfies `keep`.
    pub fn projector_where(&self, keep: impl Fn(T) -> bool) -> Hermitian<T> {
        self.map(|l| if keep(l) { T::one() } else { T::zero() })
    }

    pub fn count_where(&self, keep: impl Fn(T) -> bool) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| b.values.iter())
            .filter(|&&l| keep(l))
            .count()
    }

    pub fn reconstruct(&self) -> Hermitian<T> {
        self.map(|l| l)
    }

    /// Spectrum of `g(a)` for a non-decreasing `g`, reusing the eigenvectors.
    pub fn reweighted(&self, g: impl Fn(T) -> T) -> Spectrum<T> {
        Spectrum {
            algebra: self.algebra.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockSpectrum {
                    values: b.values.iter().map(|&l| g(l)).collect(),
                    vectors: b.vectors.clone(),
                })
                .collect(),
        }
    }
}

/// A real scalar function lifted to self-adjoint elements through the spectrum.
pub trait SpectralFunction<T: Real> {
    fn name(&self) -> &'static str;
    fn eval(&self, x: T) -> Option<T>;
    fn derivative(&self, x: T) -> Option<T>;

    /// First divided difference `f[x, y]`, falling back to `f'(x)` below the
    /// degenerate-gap threshold.
    fn divided_difference(&self, x: T, y: T) -> Option<T> {
        if (x - y).abs() < T::degenerate_gap() {
            self.derivative(x)
        } else {
            Some((self.eval(x)? - self.eval(y)?) / (x - y))
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Exp;

#[derive(Clone, Copy, Debug, Default)]
pub struct Ln;

/// User-supplied function with its derivative.
pub struct Custom<F, D> {
    pub name: &'static str,
    pub f: F,
    pub df: D,
}

impl<T: Real> SpectralFunction<T> for Exp {
    fn name(&self) -> &'static str {
        "exp"
    }
    fn eval(&self, x: T) -> Option<T> {
        Some(x.exp())
    }
    fn derivative(&self, x: T) -> Option<T> {
        Some(x.exp())
    }
    fn divided_difference(&self, x: T, y: T) -> Option<T> {
        let d = x - y;
        if d.abs() < T::degenerate_gap() {
            Some(x.exp())
        } else {
            Some(y.exp() * d.exp_m1() / d)
        }
    }
}

impl<T: Real> SpectralFunction<T> for Ln {
    fn name(&self) -> &'static str {
        "ln"
    }
    fn eval(&self, x: T) -> Option<T> {
        (x > T::zero()).then(|| x.ln())
    }
    fn derivative(&self, x: T) -> Option<T> {
        (x > T::zero()).then(|| x.recip())
    }
    fn divided_difference(&self, x: T, y: T) -> Option<T> {
        if x <= T::zero() || y <= T::zero() {
            return None;
        }
        let d = x - y;
        if d.abs() < T::degenerate_gap() {
            Some(x.recip())
        } else {
            Some((d / y).ln_1p() / d)
        }
    }
}

impl<T, F, D> SpectralFunction<T> for Custom<F, D>
where
    T: Real,
    F: Fn(T) -> Option<T>,
    D: Fn(T) -> Option<T>,
{
    fn name(&self) -> &'static str {
        self.name
    }
    fn eval(&self, x: T) -> Option<T> {
        (self.f)(x)
    }
    fn derivative(&self, x: T) -> Option<T> {
        (self.df)(x)
    }
}

/// `f(a)` evaluated on the spectrum of `a`.
pub fn apply_matrix_function<T: Real, F: SpectralFunction<T> + ?Sized>(
    a: &Hermitian<T>,
    f: &F,
) -> Result<Hermitian<T>> {
    let spec = a.eigh();
    spec.weighted(|l| f.eval(l)).ok_or_else(|| {
        Error::Domain(format!(
            "{} undefined on spectrum [{}, {}]",
            f.name(),
            spec.min(),
            spec.max()
        ))
    })
}

/// Sum of absolute eigenvalues.
pub fn trace_norm<T: Real>(a: &Hermitian<T>) -> T {
    a.eigh()
        .eigenvalues()
        .into_iter()
        .fold(T::zero(), |acc, l| acc + l.abs())
}

/// Derivative of `x -> f(x)` at `a` in direction `b` (Daleckii-Krein form):
/// in the eigenbasis of `a` the entries of `b` are weighted by `f[l_i, l_j]`.
pub fn frechet_derivative<T: Real, F: SpectralFunction<T> + ?Sized>(
    a: &Hermitian<T>,
    b: &Hermitian<T>,
    f: &F,
) -> Result<Hermitian<T>> {
    a.same_algebra(b)?;
    frechet_with_spectrum(&a.eigh(), b, f)
}

/// [`frechet_derivative`] reusing an existing decomposition of `a`.
pub fn frechet_with_spectrum<T: Real, F: SpectralFunction<T> + ?Sized>(
    spec: &Spectrum<T>,
    b: &Hermitian<T>,
    f: &F,
) -> Result<Hermitian<T>> {
    let mut blocks = Vec::with_capacity(spec.blocks.len());
    for (bs, bb) in spec.blocks.iter().zip(b.blocks()) {
        let n = bs.vectors.dim();
        let u = &bs.vectors;
        let mut inner = u.adjoint().matmul(bb).matmul(u);
        for i in 0..n {
            for j in 0..n {
                let w = f
                    .divided_difference(bs.values[i], bs.values[j])
                    .ok_or_else(|| Error::Domain(format!("{} derivative undefined", f.name())))?;
                inner[(i, j)] = inner[(i, j)].scale(w);
            }
        }
        blocks.push(u.matmul(&inner).matmul(&u.adjoint()));
    }
    Ok(Hermitian::from_blocks_symmetrized(&spec.algebra, blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::hs_inner;

    fn alg() -> Algebra {
        Algebra::new(vec![2, 1]).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sample(seed: f64) -> Hermitian<f64> {
        let s = seed;
        Hermitian::from_block_entries(
            &alg(),
            vec![
                vec![
                    c(0.3 * s, 0.),
                    c(0.2, -0.4 * s),
                    c(0.2, 0.4 * s),
                    c(-0.7, 0.),
                ],
                vec![c(0.5 - s, 0.)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn pauli_z_spectrum() {
        let a = Algebra::new(vec![2]).unwrap();
        let z = Hermitian::from_real_diagonal(&a, &[1.0, -1.0]).unwrap();
        assert_eq!(z.eigh().eigenvalues(), vec![1.0, -1.0]);
        let one = Hermitian::<f64>::identity(&alg());
        assert!(one.eigh().eigenvalues().iter().all(|&l| (l - 1.0).abs() < 1e-15));
    }

    #[test]
    fn reconstruction_residual() {
        for k in 0..5 {
            let a = sample(k as f64 * 0.37 - 0.5);
            let back = a.eigh().reconstruct();
            assert!((&a - &back).norm() <= 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = Hermitian::<f64>::zero(&alg());
        assert!((&z.exp() - &Hermitian::identity(&alg())).norm() < 1e-15);
    }

    #[test]
    fn ln_rejects_nonpositive_spectrum() {
        let x = Hermitian::from_real_diagonal(&alg(), &[1.0, 0.0, 2.0]).unwrap();
        assert!(matches!(x.ln(), Err(Error::Domain(_))));
    }

    #[test]
    fn ln_exp_round_trip() {
        for k in 0..5 {
            let a = sample(0.4 * k as f64 - 1.0);
            let back = a.exp().ln().unwrap();
            assert!((&a - &back).norm() <= 1e-10);
        }
    }

    #[test]
    fn trace_norm_of_sigma3() {
        let x = Hermitian::from_real_diagonal(&alg(), &[1.0f64, -1.0, 0.0]).unwrap();
        assert!((trace_norm(&x) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn frechet_at_zero_is_identity_map() {
        let z = Hermitian::<f64>::zero(&alg());
        let b = sample(0.3);
        let d = frechet_derivative(&z, &b, &Exp).unwrap();
        assert!((&d - &b).norm() < 1e-14);
    }

    #[test]
    fn frechet_commuting_diagonal() {
        let a = Hermitian::from_real_diagonal(&alg(), &[0.5, -1.0, 2.0]).unwrap();
        let b = Hermitian::from_real_diagonal(&alg(), &[1.0, 3.0, -2.0]).unwrap();
        let d = frechet_derivative(&a, &b, &Exp).unwrap();
        let expect =
            Hermitian::from_real_diagonal(&alg(), &[0.5f64.exp(), 3.0 * (-1.0f64).exp(), -2.0 * 2f64.exp()])
                .unwrap();
        assert!((&d - &expect).norm() < 1e-13);
    }

    #[test]
    fn frechet_matches_central_difference() {
        let h = 1e-5;
        for f in [&Exp as &dyn SpectralFunction<f64>, &Ln] {
            let a = match f.name() {
                "ln" => sample(0.2).exp(),
                _ => sample(0.8),
            };
            let b = sample(-0.6);
            let d = frechet_derivative(&a, &b, f).unwrap();
            let plus = apply_matrix_function(&a.axpy(h, &b), f).unwrap();
            let minus = apply_matrix_function(&a.axpy(-h, &b), f).unwrap();
            let fd = (&plus - &minus).scale(0.5 / h);
            assert!((&d - &fd).norm() <= 1e-7 * fd.norm(), "{}", f.name());
        }
    }

    #[test]
    fn trace_of_exp_derivative() {
        let a = sample(0.9);
        let b = sample(-0.2);
        let d = frechet_derivative(&a, &b, &Exp).unwrap();
        let expect = hs_inner(&b, &a.exp()).unwrap();
        assert!((d.trace() - expect).abs() < 1e-13);
    }

    #[test]
    fn custom_function_square() {
        let sq = Custom {
            name: "square",
            f: |x: f64| Some(x * x),
            df: |x: f64| Some(2.0 * x),
        };
        let a = sample(0.5);
        let got = apply_matrix_function(&a, &sq).unwrap();
        let expect = a.jordan_product(&a);
        assert!((&got - &expect).norm() < 1e-13);
    }
}
