//! States, projectors, entropies and exposed faces of the state space.

use num_complex::Complex;

use crate::algebra::{Algebra, Hermitian};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::Real;
use crate::spectral::{trace_norm, Spectrum};

/// A positive, unit-trace self-adjoint element (density matrix).
#[derive(Clone, Debug)]
pub struct QuantumState<T: Real> {
    element: Hermitian<T>,
    spectrum: Spectrum<T>,
    support_rank: usize,
}

impl<T: Real> QuantumState<T> {
    /// Validates positivity and unit trace up to the rejection threshold, then
    /// clamps slightly negative eigenvalues to zero and renormalizes.
    pub fn new(element: Hermitian<T>) -> Result<Self> {
        let tol = T::hermitian_reject();
        let tr = element.trace();
        if (tr - T::one()).abs() > tol {
            return Err(Error::NotAState(format!("trace {tr}")));
        }
        let spectrum = element.eigh();
        let min = spectrum.min();
        if min < -tol {
            return Err(Error::NotAState(format!("negative eigenvalue {min}")));
        }
        let (element, spectrum) = if min < T::zero() {
            let clamped = spectrum.map(|l| l.max(T::zero()));
            let fixed = clamped.scale(clamped.trace().recip());
            let spec = fixed.eigh();
            (fixed, spec)
        } else {
            let fixed = element.scale(tr.recip());
            let spec = spectrum.reweighted(|l| l / tr);
            (fixed, spec)
        };
        Ok(Self::assemble(element, spectrum))
    }

    /// Normalizes a positive semidefinite element to unit trace.
    pub fn from_positive(element: &Hermitian<T>) -> Result<Self> {
        let tr = element.trace();
        if tr <= T::zero() {
            return Err(Error::NotAState(format!("trace {tr}")));
        }
        Self::new(element.scale(tr.recip()))
    }

    fn assemble(element: Hermitian<T>, spectrum: Spectrum<T>) -> Self {
        let support_rank = spectrum.count_where(|l| l > T::support_cutoff());
        Self {
            element,
            spectrum,
            support_rank,
        }
    }

    /// `1/N`.
    pub fn tracial(algebra: &Algebra) -> Self {
        let n = T::from_usize(algebra.dim()).unwrap();
        Self::new(Hermitian::identity(algebra).scale(n.recip())).expect("tracial state")
    }

    /// The pure state `|psi><psi|` with `psi` living in block `block`.
    pub fn pure(algebra: &Algebra, block: usize, psi: &[Complex<T>]) -> Result<Self> {
        let dims = algebra.block_dims();
        if block >= dims.len() || psi.len() != dims[block] {
            return Err(Error::ShapeMismatch {
                expected: dims.get(block).copied().unwrap_or(0),
                got: psi.len(),
            });
        }
        let norm = psi.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        if norm <= T::zero() {
            return Err(Error::NotAState("zero vector".into()));
        }
        let unit: Vec<Complex<T>> = psi.iter().map(|z| z.unscale(norm)).collect();
        let blocks = dims
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                if k == block {
                    CMatrix::spectral_sum(n, &[(T::one(), unit.as_slice())])
                } else {
                    CMatrix::zeros(n)
                }
            })
            .collect();
        Self::new(Hermitian::from_blocks_symmetrized(algebra, blocks))
    }

    pub fn element(&self) -> &Hermitian<T> {
        &self.element
    }

    pub fn into_element(self) -> Hermitian<T> {
        self.element
    }

    pub fn spectrum(&self) -> &Spectrum<T> {
        &self.spectrum
    }

    pub fn algebra(&self) -> &Algebra {
        self.element.algebra()
    }

    pub fn support_rank(&self) -> usize {
        self.support_rank
    }

    pub fn is_invertible(&self) -> bool {
        self.support_rank == self.algebra().dim()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.spectrum.min()
    }

    /// `<self, a>`.
    pub fn expect(&self, a: &Hermitian<T>) -> T {
        self.element.dot(a)
    }

    /// `(1 - w) self + w other`.
    pub fn mix(&self, other: &Self, w: T) -> Result<Self> {
        self.element.same_algebra(&other.element)?;
        Self::new(self.element.scale(T::one() - w).axpy(w, &other.element))
    }

    pub fn distance(&self, other: &Self) -> T {
        (&self.element - &other.element).norm()
    }
}

/// An orthogonal projector `p = p* = p^2`.
#[derive(Clone, Debug)]
pub struct OrthoProjector<T: Real> {
    element: Hermitian<T>,
    rank: usize,
}

impl<T: Real> OrthoProjector<T> {
    pub fn new(element: Hermitian<T>) -> Result<Self> {
        let square = element.jordan_product(&element);
        let defect = (&square - &element).norm();
        if defect > T::hermitian_reject() {
            return Err(Error::Precondition(format!("not idempotent (defect {defect})")));
        }
        let rank = element.trace().round().to_usize().unwrap_or(0);
        Ok(Self { element, rank })
    }

    /// Projector onto the eigenvectors of `spec` selected by `keep`.
    pub fn from_spectrum(spec: &Spectrum<T>, keep: impl Fn(T) -> bool + Copy) -> Self {
        Self {
            element: spec.projector_where(keep),
            rank: spec.count_where(keep),
        }
    }

    pub fn identity(algebra: &Algebra) -> Self {
        Self {
            element: Hermitian::identity(algebra),
            rank: algebra.dim(),
        }
    }

    pub fn element(&self) -> &Hermitian<T> {
        &self.element
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn algebra(&self) -> &Algebra {
        self.element.algebra()
    }

    pub fn is_identity(&self) -> bool {
        self.rank == self.algebra().dim()
    }

    /// `1 - p`.
    pub fn complement(&self) -> Self {
        Self {
            element: &Hermitian::identity(self.algebra()) - &self.element,
            rank: self.algebra().dim() - self.rank,
        }
    }

    /// Weight `<rho, 1 - p>` that a state puts outside the image of `p`.
    pub fn leakage(&self, rho: &QuantumState<T>) -> T {
        T::one() - rho.expect(&self.element)
    }

    /// Image inclusion `Im(rho) ⊂ Im(p)` at the support cutoff.
    pub fn contains_support_of(&self, rho: &QuantumState<T>) -> bool {
        self.leakage(rho) <= T::support_cutoff()
    }

    /// Largest principal-angle sine between the two images.
    pub fn image_distance(&self, other: &Self) -> T {
        let diff = &self.element - &other.element;
        let spec = diff.eigh();
        spec.max().abs().max(spec.min().abs())
    }

    /// Same rank and every principal angle below `tol`.
    pub fn same_image(&self, other: &Self, tol: T) -> bool {
        self.rank == other.rank && self.image_distance(other) < tol
    }
}

/// von Neumann entropy `-tr(rho ln rho)`.
pub fn vn_entropy<T: Real>(rho: &QuantumState<T>) -> T {
    rho.spectrum
        .eigenvalues()
        .into_iter()
        .filter(|&l| l > T::zero())
        .fold(T::zero(), |acc, l| acc - l * l.ln())
}

/// Umegaki relative entropy; `+inf` when `Im(sigma)` does not contain `Im(rho)`.
pub fn relative_entropy<T: Real>(rho: &QuantumState<T>, sigma: &QuantumState<T>) -> Result<T> {
    rho.element.same_algebra(&sigma.element)?;
    let cutoff = T::support_cutoff();
    let kernel = sigma.spectrum.projector_where(|l| l <= cutoff);
    if rho.expect(&kernel) > cutoff {
        return Ok(T::infinity());
    }
    let log_sigma = sigma
        .spectrum
        .map(|l| if l > cutoff { l.ln() } else { T::zero() });
    let value = -vn_entropy(rho) - rho.expect(&log_sigma);
    Ok(value.max(T::zero()))
}

/// Largest eigenvalue and its spectral projector (gap tolerance `top_gap`).
pub fn max_eig_data<T: Real>(u: &Hermitian<T>) -> (T, OrthoProjector<T>) {
    let spec = u.eigh();
    let top = spec.max();
    let gap = T::top_gap() * (T::one() + top.abs());
    (top, OrthoProjector::from_spectrum(&spec, |l| l >= top - gap))
}

/// Whether `rho` lies in the exposed face `F(S(A), u)`.
///
/// Both characterizations are evaluated: `<rho, u> = mu_+(u)` and
/// `Im(rho) ⊂ Im(p_+(u))`. Disagreement means the input sits on a numerical
/// knife edge and is reported as an error.
pub fn exposed_face_membership<T: Real>(rho: &QuantumState<T>, u: &Hermitian<T>) -> Result<bool> {
    rho.element.same_algebra(u)?;
    if u.norm() <= T::zero() {
        return Err(Error::Precondition("direction must be non-zero".into()));
    }
    let (top, p) = max_eig_data(u);
    let value_gap = top - rho.expect(u);
    let off_face = p.leakage(rho);
    let tol = T::support_cutoff();
    let by_value = value_gap.abs() <= tol * (T::one() + u.norm());
    let by_image = off_face <= tol;
    if by_value != by_image {
        return Err(Error::DegenerateFace {
            value_gap: value_gap.to_f64().unwrap_or(f64::NAN),
            off_face: off_face.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(by_value)
}

/// Output of [`compress`]: `p a p` and its traceless part `c^p(a)` in `pAp`.
#[derive(Clone, Debug)]
pub struct Compression<T: Real> {
    pub sandwich: Hermitian<T>,
    pub centered: Hermitian<T>,
}

/// `p a p` and `c^p(a) = p a p - p tr(p a) / tr(p)`.
pub fn compress<T: Real>(p: &OrthoProjector<T>, a: &Hermitian<T>) -> Result<Compression<T>> {
    p.element.same_algebra(a)?;
    if p.rank == 0 {
        return Err(Error::ZeroProjector);
    }
    let sandwich = a.sandwich(&p.element);
    let shift = p.element.dot(a) / p.element.trace();
    let centered = sandwich.axpy(-shift, &p.element);
    Ok(Compression { sandwich, centered })
}

/// Projector onto the image of `rho` (eigenvalue cutoff `support_cutoff`).
pub fn support_projector<T: Real>(rho: &QuantumState<T>) -> OrthoProjector<T> {
    OrthoProjector::from_spectrum(&rho.spectrum, |l| l > T::support_cutoff())
}

/// `S(rho, sigma) - ||rho - sigma||_1^2 / 2`, non-negative by Pinsker-Csiszár.
pub fn pinsker_gap<T: Real>(rho: &QuantumState<T>, sigma: &QuantumState<T>) -> Result<T> {
    let s = relative_entropy(rho, sigma)?;
    let d = trace_norm(&(&rho.element - &sigma.element));
    Ok(s - T::lit(0.5) * d * d)
}

/// `S(rho, sigma) / 2 - ||rho - sigma||_1^2`, i.e. the inequality with the
/// constants swapped. Negative values are counterexamples to that form.
pub fn swapped_constant_pinsker_gap<T: Real>(rho: &QuantumState<T>, sigma: &QuantumState<T>) -> Result<T> {
    let s = relative_entropy(rho, sigma)?;
    let d = trace_norm(&(&rho.element - &sigma.element));
    Ok(T::lit(0.5) * s - d * d)
}

/// Gibbs state `e^a / tr(e^a)`, shifted by the top eigenvalue before exponentiating.
pub fn gibbs_state<T: Real>(a: &Hermitian<T>) -> QuantumState<T> {
    let spec = a.eigh();
    gibbs_from_spectrum(&spec)
}

pub(crate) fn gibbs_from_spectrum<T: Real>(spec: &Spectrum<T>) -> QuantumState<T> {
    let top = spec.max();
    let unnormalized = spec.map(|l| (l - top).exp());
    let z = unnormalized.trace();
    let element = unnormalized.scale(z.recip());
    let spectrum = spec.reweighted(|l| (l - top).exp() / z);
    QuantumState::assemble(element, spectrum)
}

/// Free energy `ln tr(e^a)` without overflow.
pub fn log_partition<T: Real>(a: &Hermitian<T>) -> T {
    log_partition_from_spectrum(&a.eigh())
}

pub(crate) fn log_partition_from_spectrum<T: Real>(spec: &Spectrum<T>) -> T {
    let top = spec.max();
    let sum = spec
        .eigenvalues()
        .into_iter()
        .fold(T::zero(), |acc, l| acc + (l - top).exp());
    top + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg() -> Algebra {
        Algebra::new(vec![2, 1]).unwrap()
    }

    fn diag(d: &[f64]) -> QuantumState<f64> {
        QuantumState::new(Hermitian::from_real_diagonal(&alg(), d).unwrap()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// rho(0) = (1 + sigma_2)/2 + 0
    fn rho0() -> QuantumState<f64> {
        QuantumState::pure(&alg(), 0, &[c(1.0, 0.0), c(0.0, 1.0)]).unwrap()
    }

    fn apex() -> QuantumState<f64> {
        diag(&[0.0, 0.0, 1.0])
    }

    #[test]
    fn state_validation() {
        let a = alg();
        assert!(QuantumState::new(Hermitian::from_real_diagonal(&a, &[0.5, 0.5, 0.5]).unwrap()).is_err());
        assert!(QuantumState::new(Hermitian::from_real_diagonal(&a, &[1.5, -0.5, 0.0]).unwrap()).is_err());
        let s = QuantumState::new(Hermitian::from_real_diagonal(&a, &[1.0 + 1e-12, -1e-12, 0.0]).unwrap()).unwrap();
        assert!(s.min_eigenvalue() >= 0.0);
        assert_eq!(s.support_rank(), 1);
    }

    #[test]
    fn entropy_values() {
        assert!(vn_entropy(&rho0()).abs() < 1e-14);
        let t = QuantumState::<f64>::tracial(&alg());
        assert!((vn_entropy(&t) - 3f64.ln()).abs() < 1e-14);
        let c = rho0().mix(&apex(), 0.5).unwrap();
        assert!((vn_entropy(&c) - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_values() {
        let t = QuantumState::<f64>::tracial(&alg());
        assert!(relative_entropy(&t, &t).unwrap().abs() < 1e-14);
        let c = rho0().mix(&apex(), 0.5).unwrap();
        assert!((relative_entropy(&rho0(), &c).unwrap() - 2f64.ln()).abs() < 1e-13);
        let other = QuantumState::pure(&alg(), 0, &[c_(1.0, 0.0), c_(0.0, -1.0)]).unwrap();
        assert!(relative_entropy(&rho0(), &other).unwrap().is_infinite());
        assert!(relative_entropy(&c, &rho0()).unwrap().is_infinite());
    }

    fn c_(re: f64, im: f64) -> Complex<f64> {
        c(re, im)
    }

    #[test]
    fn maximal_projector_examples() {
        let s3 = Hermitian::from_real_diagonal(&alg(), &[1.0, -1.0, 0.0]).unwrap();
        let (mu, p) = max_eig_data(&s3);
        assert_eq!(mu, 1.0);
        let expect = Hermitian::from_real_diagonal(&alg(), &[1.0, 0.0, 0.0]).unwrap();
        assert!((p.element() - &expect).norm() < 1e-15);
        let (_, p) = max_eig_data(&Hermitian::<f64>::identity(&alg()));
        assert!(p.is_identity());
    }

    #[test]
    fn exposed_face_examples() {
        let s3 = Hermitian::from_real_diagonal(&alg(), &[1.0, -1.0, 0.0]).unwrap();
        assert!(!exposed_face_membership(&QuantumState::tracial(&alg()), &s3).unwrap());
        assert!(exposed_face_membership(&diag(&[1.0, 0.0, 0.0]), &s3).unwrap());
        assert!(exposed_face_membership(&rho0(), &Hermitian::zero(&alg())).is_err());
    }

    #[test]
    fn compress_identity_is_centered_to_zero() {
        let p = support_projector(&rho0().mix(&apex(), 0.5).unwrap());
        let comp = compress(&p, &Hermitian::identity(&alg())).unwrap();
        assert!(comp.centered.norm() < 1e-14);
        let zero = OrthoProjector::from_spectrum(&Hermitian::<f64>::zero(&alg()).eigh(), |l| l > 0.5);
        assert!(matches!(compress(&zero, &Hermitian::identity(&alg())), Err(Error::ZeroProjector)));
    }

    #[test]
    fn support_projector_examples() {
        let t = QuantumState::<f64>::tracial(&alg());
        assert!(support_projector(&t).is_identity());
        let r = rho0();
        assert!((support_projector(&r).element() - r.element()).norm() < 1e-14);
        let c = rho0().mix(&apex(), 0.5).unwrap();
        let expect = r.element() + apex().element();
        assert!((support_projector(&c).element() - &expect).norm() < 1e-14);
    }

    #[test]
    fn pinsker_bit_example() {
        let bit = Algebra::abelian(2).unwrap();
        let rho = QuantumState::new(Hermitian::from_real_diagonal(&bit, &[1.0, 0.0]).unwrap()).unwrap();
        let sigma = QuantumState::new(Hermitian::from_real_diagonal(&bit, &[0.5, 0.5]).unwrap()).unwrap();
        let gap = pinsker_gap(&rho, &sigma).unwrap();
        assert!((gap - (2f64.ln() - 0.5)).abs() < 1e-14);
        let swapped = swapped_constant_pinsker_gap(&rho, &sigma).unwrap();
        assert!((swapped - (0.5 * 2f64.ln() - 1.0)).abs() < 1e-14);
        assert!(swapped < 0.0);
    }

    #[test]
    fn gibbs_and_partition() {
        let a = Hermitian::from_real_diagonal(&alg(), &[2.0, -2.0, 0.0]).unwrap();
        let g = gibbs_state(&a);
        let z = 2.0 * 2f64.cosh() + 1.0;
        let expect = Hermitian::from_real_diagonal(&alg(), &[2f64.exp() / z, (-2f64).exp() / z, 1.0 / z]).unwrap();
        assert!((g.element() - &expect).norm() < 1e-15);
        assert!((log_partition(&a) - z.ln()).abs() < 1e-14);
        let big = a.scale(500.0);
        assert!(log_partition(&big).is_finite());
        assert!(gibbs_state(&big).support_rank() >= 1);
    }
}
