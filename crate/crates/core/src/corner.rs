//! The compressed algebra `pAp` for an orthogonal projector `p`.
//!
//! `pAp` is again a direct sum of full matrix algebras, of sizes
//! `r_k = rank(p_k)` on the blocks where `p` is non-zero. A [`Corner`] keeps an
//! orthonormal basis of each `Im(p_k)` and moves elements between the ambient
//! algebra and that reduced algebra, where the compressed functions `exp^p`,
//! `ln^p`, `F^p` are ordinary matrix functions.

use num_complex::Complex;
use num_traits::Zero;

use crate::algebra::{Algebra, Hermitian};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::Real;
use crate::state::{gibbs_state, log_partition, OrthoProjector, QuantumState};

#[derive(Clone, Debug)]
struct BlockFrame<T: Real> {
    ambient_block: usize,
    basis: Vec<Vec<Complex<T>>>,
}

#[derive(Clone, Debug)]
pub struct Corner<T: Real> {
    projector: OrthoProjector<T>,
    reduced: Algebra,
    frames: Vec<BlockFrame<T>>,
}

impl<T: Real> Corner<T> {
    pub fn new(p: &OrthoProjector<T>) -> Result<Self> {
        if p.rank() == 0 {
            return Err(Error::ZeroProjector);
        }
        let spec = p.element().eigh();
        let half = T::lit(0.5);
        let mut frames = Vec::new();
        for (k, b) in spec.blocks().iter().enumerate() {
            let basis: Vec<Vec<Complex<T>>> = b
                .values
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > half)
                .map(|(j, _)| b.vectors.column(j))
                .collect();
            if !basis.is_empty() {
                frames.push(BlockFrame {
                    ambient_block: k,
                    basis,
                });
            }
        }
        let dims = frames.iter().map(|f| f.basis.len()).collect();
        let reduced = Algebra::with_cap(dims, p.algebra().dim())?;
        Ok(Self {
            projector: p.clone(),
            reduced,
            frames,
        })
    }

    pub fn projector(&self) -> &OrthoProjector<T> {
        &self.projector
    }

    pub fn ambient(&self) -> &Algebra {
        self.projector.algebra()
    }

    pub fn reduced(&self) -> &Algebra {
        &self.reduced
    }

    /// Matrix of `p a p` in the reduced algebra.
    pub fn restrict(&self, a: &Hermitian<T>) -> Hermitian<T> {
        debug_assert_eq!(a.algebra(), self.ambient());
        let blocks = self
            .frames
            .iter()
            .map(|f| {
                let m = a.block(f.ambient_block);
                let n = m.dim();
                let images: Vec<Vec<Complex<T>>> = f
                    .basis
                    .iter()
                    .map(|v| (0..n).map(|i| (0..n).fold(Complex::zero(), |acc, j| acc + m[(i, j)] * v[j])).collect())
                    .collect();
                let r = f.basis.len();
                CMatrix::from_fn(r, |i, j| {
                    f.basis[i]
                        .iter()
                        .zip(&images[j])
                        .fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
                })
            })
            .collect();
        Hermitian::from_blocks_symmetrized(&self.reduced, blocks)
    }

    /// Inverse of [`Corner::restrict`] on `pAp`: zero outside `Im(p)`.
    pub fn embed(&self, r: &Hermitian<T>) -> Hermitian<T> {
        debug_assert_eq!(r.algebra(), &self.reduced);
        let mut blocks: Vec<CMatrix<T>> = self.ambient().block_dims().iter().map(|&n| CMatrix::zeros(n)).collect();
        for (f, m) in self.frames.iter().zip(r.blocks()) {
            let n = blocks[f.ambient_block].dim();
            let out = &mut blocks[f.ambient_block];
            for (a, va) in f.basis.iter().enumerate() {
                for (b, vb) in f.basis.iter().enumerate() {
                    let w = m[(a, b)];
                    if w.is_zero() {
                        continue;
                    }
                    for i in 0..n {
                        let x = va[i] * w;
                        for j in 0..n {
                            out[(i, j)] += x * vb[j].conj();
                        }
                    }
                }
            }
        }
        Hermitian::from_blocks_symmetrized(self.ambient(), blocks)
    }

    /// A state supported in `p`, as a state of the reduced algebra.
    pub fn restrict_state(&self, rho: &QuantumState<T>) -> Result<QuantumState<T>> {
        let leak = self.projector.leakage(rho);
        if leak > T::support_cutoff() {
            return Err(Error::NotSupported(leak.to_f64().unwrap_or(f64::NAN)));
        }
        QuantumState::from_positive(&self.restrict(rho.element()))
    }

    pub fn embed_state(&self, rho: &QuantumState<T>) -> QuantumState<T> {
        QuantumState::new(self.embed(rho.element())).expect("embedding preserves states")
    }

    /// `c^p(a) = pap - p tr(pa)/tr(p)`, in ambient coordinates.
    pub fn center(&self, a: &Hermitian<T>) -> Hermitian<T> {
        self.embed(&self.restrict(a).traceless_part())
    }

    /// `exp^p(a) = p e^{pap} p`.
    pub fn exp(&self, a: &Hermitian<T>) -> Hermitian<T> {
        self.embed(&self.restrict(a).exp())
    }

    /// `ln^p(rho)`, defined when `rho` is invertible on `Im(p)`.
    pub fn ln(&self, a: &Hermitian<T>) -> Result<Hermitian<T>> {
        let r = self.restrict(a);
        let spec = r.eigh();
        let min = spec.min();
        if min <= T::support_cutoff() {
            return Err(Error::Singular(min.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(self.embed(&spec.map(T::ln)))
    }

    /// `F^p(a) = ln tr(p e^{pap})`.
    pub fn free_energy(&self, a: &Hermitian<T>) -> T {
        log_partition(&self.restrict(a))
    }

    /// `exp1^p(a) = exp^p(a) / tr exp^p(a)`.
    pub fn exp1(&self, a: &Hermitian<T>) -> QuantumState<T> {
        self.embed_state(&gibbs_state(&self.restrict(a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::support_projector;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn alg() -> Algebra {
        Algebra::new(vec![2, 1]).unwrap()
    }

    fn face_projector() -> OrthoProjector<f64> {
        let rho0 = QuantumState::pure(&alg(), 0, &[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let apex = QuantumState::new(Hermitian::from_real_diagonal(&alg(), &[0.0, 0.0, 1.0]).unwrap()).unwrap();
        support_projector(&rho0.mix(&apex, 0.5).unwrap())
    }

    fn sample() -> Hermitian<f64> {
        Hermitian::from_block_entries(
            &alg(),
            vec![vec![c(0.3, 0.0), c(0.2, -0.4), c(0.2, 0.4), c(-0.7, 0.0)], vec![c(1.1, 0.0)]],
        )
        .unwrap()
    }

    #[test]
    fn restrict_embed_round_trip() {
        let corner = Corner::new(&face_projector()).unwrap();
        assert_eq!(corner.reduced().block_dims(), &[1, 1]);
        let a = sample();
        let pap = a.sandwich(face_projector().element());
        assert!((corner.embed(&corner.restrict(&a)) - pap).norm() < 1e-14);
    }

    #[test]
    fn center_matches_definition() {
        let p = face_projector();
        let corner = Corner::new(&p).unwrap();
        let a = sample();
        let expect = crate::state::compress(&p, &a).unwrap().centered;
        assert!((corner.center(&a) - expect).norm() < 1e-14);
    }

    #[test]
    fn compressed_exponential_lives_on_p() {
        let p = face_projector();
        let corner = Corner::new(&p).unwrap();
        let s = corner.exp1(&sample());
        assert!(p.contains_support_of(&s));
        assert!((s.element().trace() - 1.0).abs() < 1e-14);
        let back = corner.ln(s.element()).unwrap();
        let expect = corner.center(&sample());
        assert!((corner.center(&back) - expect).norm() < 1e-12);
    }

    #[test]
    fn identity_corner_is_ambient() {
        let corner = Corner::new(&OrthoProjector::<f64>::identity(&alg())).unwrap();
        let a = sample();
        assert!((corner.free_energy(&a) - crate::state::log_partition(&a)).abs() < 1e-14);
    }
}
