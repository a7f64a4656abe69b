//! Seeded random elements and states for tests, reports and searches.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{Algebra, Hermitian};
use crate::matrix::CMatrix;
use crate::state::QuantumState;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Hermitian element with i.i.d. Gaussian entries (GUE-like per block), scaled.
pub fn random_hermitian<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R, scale: f64) -> Hermitian<f64> {
    let blocks = algebra
        .block_dims()
        .iter()
        .map(|&n| {
            let g = CMatrix::from_fn(n, |_, _| gaussian(rng));
            g.hermitian_part().scale(scale)
        })
        .collect();
    Hermitian::from_blocks(algebra, blocks).expect("hermitian by construction")
}

pub fn random_traceless<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R, scale: f64) -> Hermitian<f64> {
    random_hermitian(algebra, rng, scale).traceless_part()
}

/// Ginibre state `G G* / tr(G G*)`; almost surely invertible.
pub fn random_state<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R) -> QuantumState<f64> {
    let blocks = algebra
        .block_dims()
        .iter()
        .map(|&n| {
            let g = CMatrix::from_fn(n, |_, _| gaussian(rng));
            g.matmul(&g.adjoint())
        })
        .collect();
    let positive = Hermitian::from_blocks(algebra, blocks).expect("positive by construction");
    QuantumState::from_positive(&positive).expect("non-zero")
}

/// Ginibre state mixed with `1/N` at weight `floor`, so every eigenvalue is at least `floor / N`.
pub fn random_invertible_state<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R, floor: f64) -> QuantumState<f64> {
    random_state(algebra, rng)
        .mix(&QuantumState::tracial(algebra), floor)
        .expect("same algebra")
}

/// Pure state in a block chosen with probability proportional to its size.
pub fn random_pure<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R) -> QuantumState<f64> {
    let mut pick = rng.random_range(0..algebra.dim());
    let mut block = 0;
    for (k, &n) in algebra.block_dims().iter().enumerate() {
        if pick < n {
            block = k;
            break;
        }
        pick -= n;
    }
    let n = algebra.block_dims()[block];
    let psi: Vec<Complex<f64>> = (0..n).map(|_| gaussian(rng)).collect();
    QuantumState::pure(algebra, block, &psi).expect("non-zero vector")
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
