//! Exponential families `exp1(theta_0 + V)`, their charts, and the entropy
//! distance projection.

use crate::algebra::Algebra;
use crate::dense::{self, SymMatrix};
use crate::error::{Error, Result};
use crate::spectral::{frechet_with_spectrum, Exp, Spectrum};
use crate::state::{max_eig_data, gibbs_from_spectrum, gibbs_state, log_partition, log_partition_from_spectrum, relative_entropy, vn_entropy};
use crate::{HermitianElement, State};

/// Trace-normalized exponential `e^a / tr(e^a)`.
pub fn exp1(a: &HermitianElement) -> State {
    gibbs_state(a)
}

/// Canonical chart `ln rho - 1 tr(ln rho)/N`.
pub fn ln0(rho: &State) -> Result<HermitianElement> {
    let min = rho.min_eigenvalue();
    if !rho.is_invertible() {
        return Err(Error::Singular(min));
    }
    Ok(rho.spectrum().map(f64::ln).traceless_part())
}

/// Free energy value together with its gradient representative `exp1(a)`.
#[derive(Clone, Debug)]
pub struct FreeEnergy {
    pub value: f64,
    pub gradient: State,
}

/// `F(a) = ln tr(e^a)`; `D_a F(b) = <b, exp1(a)>`.
pub fn free_energy(a: &HermitianElement) -> FreeEnergy {
    let spec = a.eigh();
    FreeEnergy {
        value: log_partition_from_spectrum(&spec),
        gradient: gibbs_from_spectrum(&spec),
    }
}

/// Tolerance for the Gram-Schmidt rank test.
const RANK_TOL: f64 = 1e-12;

/// `exp1(theta_0 + V)` with `theta_0 ⊥ V`, both traceless, `V` orthonormal.
#[derive(Clone, Debug)]
pub struct ExponentialFamily {
    algebra: Algebra,
    offset: HermitianElement,
    basis: Vec<HermitianElement>,
}

impl ExponentialFamily {
    /// Orthonormalizes the traceless parts of `generators` (modified
    /// Gram-Schmidt) and rejects rank-deficient input.
    pub fn new(offset: HermitianElement, generators: &[HermitianElement]) -> Result<Self> {
        let basis = orthonormalize(offset.algebra(), generators, true)?;
        Self::from_orthonormal(offset, basis)
    }

    /// Linear family `exp1(V)`.
    pub fn linear(algebra: &Algebra, generators: &[HermitianElement]) -> Result<Self> {
        Self::new(HermitianElement::zero(algebra), generators)
    }

    /// Like [`ExponentialFamily::new`], but dependent generators are dropped
    /// instead of rejected. Used for images of a tangent space under a
    /// non-injective map.
    pub fn spanned_by(offset: HermitianElement, generators: &[HermitianElement]) -> Result<Self> {
        let basis = orthonormalize(offset.algebra(), generators, false)?;
        Self::from_orthonormal(offset, basis)
    }

    fn from_orthonormal(offset: HermitianElement, basis: Vec<HermitianElement>) -> Result<Self> {
        let algebra = offset.algebra().clone();
        let mut offset = offset.traceless_part();
        for v in &basis {
            offset = offset.axpy(-offset.dot(v), v);
        }
        Ok(Self {
            algebra,
            offset,
            basis,
        })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn offset(&self) -> &HermitianElement {
        &self.offset
    }

    pub fn basis(&self) -> &[HermitianElement] {
        &self.basis
    }

    pub fn is_linear(&self) -> bool {
        self.offset.is_zero_within(0.0)
    }

    /// `theta_0 + sum_i c_i v_i`.
    pub fn parameter(&self, coords: &[f64]) -> HermitianElement {
        assert_eq!(coords.len(), self.dim(), "coordinate length");
        self.basis
            .iter()
            .zip(coords)
            .fold(self.offset.clone(), |acc, (v, &c)| acc.axpy(c, v))
    }

    /// `sum_i w_i v_i` (no offset).
    pub fn parameter_direction(&self, w: &[f64]) -> HermitianElement {
        assert_eq!(w.len(), self.dim(), "coordinate length");
        self.basis
            .iter()
            .zip(w)
            .fold(HermitianElement::zero(&self.algebra), |acc, (v, &c)| acc.axpy(c, v))
    }

    pub fn state_at(&self, coords: &[f64]) -> State {
        exp1(&self.parameter(coords))
    }

    /// Coordinates `(<a, v_1>, ..., <a, v_n>)`.
    pub fn coordinates(&self, a: &HermitianElement) -> Vec<f64> {
        self.basis.iter().map(|v| a.dot(v)).collect()
    }

    /// Orthogonal projection of `a` onto `V`.
    pub fn tangent_part(&self, a: &HermitianElement) -> HermitianElement {
        self.basis
            .iter()
            .fold(HermitianElement::zero(&self.algebra), |acc, v| acc.axpy(a.dot(v), v))
    }

    /// Norm of the component of the traceless part of `a` orthogonal to `V`.
    pub fn tangent_defect(&self, a: &HermitianElement) -> f64 {
        let t = a.traceless_part();
        (&t - &self.tangent_part(&t)).norm()
    }

    /// Distance of `ln0(rho)` from the parameter space, or `None` for singular states.
    pub fn membership_defect(&self, rho: &State) -> Option<f64> {
        let theta = ln0(rho).ok()?;
        Some(self.tangent_defect(&(&theta - &self.offset)))
    }

    /// Whether two families share algebra, parameter space and tangent space.
    pub fn same_family(&self, other: &Self, tol: f64) -> bool {
        self.algebra == other.algebra
            && self.dim() == other.dim()
            && self.basis.iter().all(|v| other.tangent_defect(v) <= tol)
            && other.tangent_defect(&(&self.offset - &other.offset)) <= tol
    }
}

fn orthonormalize(algebra: &Algebra, generators: &[HermitianElement], strict: bool) -> Result<Vec<HermitianElement>> {
    let mut basis: Vec<HermitianElement> = Vec::with_capacity(generators.len());
    for g in generators {
        g.same_algebra(&HermitianElement::zero(algebra))?;
        let scale = g.norm().max(1.0);
        let mut r = g.traceless_part();
        for _ in 0..2 {
            for v in &basis {
                r = r.axpy(-r.dot(v), v);
            }
        }
        let n = r.norm();
        if n <= RANK_TOL * scale || (!strict && n <= 1e-9 * scale) {
            if strict {
                return Err(Error::RankDeficient(n));
            }
            continue;
        }
        basis.push(r.scale(1.0 / n));
    }
    Ok(basis)
}

/// Knobs for [`project_to_family`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub param_cap: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            param_cap: 80.0,
            max_iter: 500,
        }
    }
}

impl SolverOptions {
    pub fn with_cap(self, param_cap: f64) -> Self {
        Self { param_cap, ..self }
    }
}

/// Outcome of minimizing `sigma -> S(rho, sigma)` over the family.
#[derive(Clone, Debug)]
pub struct ProjectionResult {
    /// Coordinates of the minimizer in the tangent basis.
    pub theta_star: Vec<f64>,
    pub sigma_star: State,
    /// `true` iff the minimizer lies strictly inside the ball `||c|| < param_cap`.
    /// A minimizer on the cap sphere means the infimum was not reached
    /// within the allowed parameter range.
    pub attained: bool,
    /// Gradient norm (Riemannian gradient on the cap sphere when not attained).
    pub grad_residual: f64,
    pub iterations: usize,
    pub distance: f64,
    /// Smallest Hessian eigenvalue over all iterates.
    pub min_hessian_eig: f64,
}

impl ProjectionResult {
    pub fn orthogonality_residual(&self, rho: &State, family: &ExponentialFamily) -> f64 {
        let diff = rho.element() - self.sigma_star.element();
        family.coordinates(&diff).iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

struct Objective<'a> {
    family: &'a ExponentialFamily,
    rho_coords: Vec<f64>,
    rho_offset: f64,
}

struct Evaluation {
    value: f64,
    grad: Vec<f64>,
    spectrum: Spectrum<f64>,
}

impl<'a> Objective<'a> {
    fn new(family: &'a ExponentialFamily, rho: &State) -> Self {
        Self {
            family,
            rho_coords: family.coordinates(rho.element()),
            rho_offset: rho.expect(family.offset()),
        }
    }

    /// `F(theta(c)) - <rho, theta(c)>`.
    fn value(&self, c: &[f64]) -> f64 {
        log_partition(&self.family.parameter(c)) - self.rho_offset - dense::dot(&self.rho_coords, c)
    }

    fn evaluate(&self, c: &[f64]) -> Evaluation {
        let spectrum = self.family.parameter(c).eigh();
        let value = log_partition_from_spectrum(&spectrum) - self.rho_offset - dense::dot(&self.rho_coords, c);
        let sigma = gibbs_from_spectrum(&spectrum);
        let grad = self
            .family
            .coordinates(sigma.element())
            .iter()
            .zip(&self.rho_coords)
            .map(|(s, r)| s - r)
            .collect();
        Evaluation { value, grad, spectrum }
    }

    /// BKM covariance `<v_i, D exp1 [v_j]>` in the tangent basis.
    fn hessian(&self, eval: &Evaluation) -> SymMatrix {
        let basis = self.family.basis();
        let n = basis.len();
        let top = eval.spectrum.max();
        let shifted = eval.spectrum.reweighted(|l| l - top);
        let z: f64 = shifted.eigenvalues().iter().map(|l| l.exp()).sum();
        let sigma = gibbs_from_spectrum(&eval.spectrum);
        let s: Vec<f64> = self.family.coordinates(sigma.element());
        let mut h = SymMatrix::zeros(n);
        for j in 0..n {
            let d = frechet_with_spectrum(&shifted, &basis[j], &Exp).expect("exp is entire");
            for i in 0..=j {
                let v = basis[i].dot(&d) / z - s[i] * s[j];
                h.set(i, j, v);
                h.set(j, i, v);
            }
        }
        h.symmetrize();
        h
    }
}

const ARMIJO: f64 = 1e-4;

fn radial_clip(c: &mut [f64], cap: f64) {
    let n = dense::norm(c);
    if n > cap {
        c.iter_mut().for_each(|x| *x *= cap / n);
    }
}

/// Damped Newton with Armijo backtracking on `F(theta) - <rho, theta>`,
/// restricted to the ball `||c|| <= param_cap`.
pub fn project_to_family(rho: &State, family: &ExponentialFamily, opts: &SolverOptions) -> Result<ProjectionResult> {
    project_from(rho, family, opts, vec![0.0; family.dim()])
}

/// [`project_to_family`] started from `start` (clipped into the ball).
pub fn project_from(
    rho: &State,
    family: &ExponentialFamily,
    opts: &SolverOptions,
    start: Vec<f64>,
) -> Result<ProjectionResult> {
    if rho.algebra() != family.algebra() {
        return Err(Error::AlgebraMismatch(
            rho.algebra().block_dims().to_vec(),
            family.algebra().block_dims().to_vec(),
        ));
    }
    if start.len() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            got: start.len(),
        });
    }
    let objective = Objective::new(family, rho);
    let n = family.dim();
    let cap = opts.param_cap;
    let mut c = start;
    radial_clip(&mut c, cap);
    let mut min_eig = f64::INFINITY;
    let slack = |v: f64| 1e-15 * (1.0 + v.abs());

    for iter in 0..=opts.max_iter {
        let eval = objective.evaluate(&c);
        let grad_norm = dense::norm(&eval.grad);
        if n == 0 {
            return Ok(finish(rho, c, eval, true, grad_norm, iter, min_eig));
        }
        let h = objective.hessian(&eval);
        min_eig = min_eig.min(h.min_eigenvalue());
        if grad_norm <= opts.tol {
            match escape_direction(rho, family, &h) {
                None => return Ok(finish(rho, c, eval, true, grad_norm, iter, min_eig)),
                Some(w) => {
                    if dense::norm(&c) >= cap * (1.0 - 1e-12) {
                        return Ok(finish(rho, c, eval, false, grad_norm, iter, min_eig));
                    }
                    c = push_to_sphere(&c, &w, cap);
                    continue;
                }
            }
        }
        if iter == opts.max_iter {
            break;
        }

        let r = dense::norm(&c);
        let gc = dense::dot(&eval.grad, &c);
        if r >= cap * (1.0 - 1e-12) && gc < 0.0 {
            // Boundary phase: Newton on the sphere of radius `cap`.
            let r2 = r * r;
            let pg: Vec<f64> = (0..n).map(|i| eval.grad[i] - gc / r2 * c[i]).collect();
            let rg = dense::norm(&pg);
            if rg <= opts.tol {
                return Ok(finish(rho, c, eval, false, rg, iter, min_eig));
            }
            let nu = -gc / r2;
            let hp = project_hessian(&h, &c, r2, nu);
            let neg: Vec<f64> = pg.iter().map(|x| -x).collect();
            let d = hp.solve_regularized(&neg);
            let slope = dense::dot(&pg, &d).min(-rg * rg * 1e-12);
            let mut t = 1.0;
            let mut accepted = None;
            while t > 1e-20 {
                let mut trial: Vec<f64> = c.iter().zip(&d).map(|(x, y)| x + t * y).collect();
                let tn = dense::norm(&trial);
                trial.iter_mut().for_each(|x| *x *= cap / tn);
                let v = objective.value(&trial);
                if v <= eval.value + ARMIJO * t * slope + slack(eval.value) {
                    accepted = Some(trial);
                    break;
                }
                t *= 0.5;
            }
            match accepted {
                Some(next) => c = next,
                None => {
                    return if rg <= 1e3 * opts.tol {
                        Ok(finish(rho, c, eval, false, rg, iter, min_eig))
                    } else {
                        Err(Error::SolverFailure { iterations: iter, grad: rg })
                    };
                }
            }
            continue;
        }

        let neg: Vec<f64> = eval.grad.iter().map(|x| -x).collect();
        let d = h.solve_regularized(&neg);
        // Stop at the cap sphere instead of clipping: along a flat direction
        // the Newton step is huge and its radial clip would point elsewhere.
        let mut t = 1.0f64.min(step_to_sphere(&c, &d, cap));
        let mut accepted = None;
        while t > 1e-20 {
            let mut trial: Vec<f64> = c.iter().zip(&d).map(|(x, y)| x + t * y).collect();
            radial_clip(&mut trial, cap);
            let step: Vec<f64> = trial.iter().zip(&c).map(|(a, b)| a - b).collect();
            let v = objective.value(&trial);
            if v <= eval.value + ARMIJO * dense::dot(&eval.grad, &step) + slack(eval.value) {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => c = next,
            None => {
                return if grad_norm <= 1e3 * opts.tol {
                    let interior = dense::norm(&c) < cap * (1.0 - 1e-9);
                    Ok(finish(rho, c, eval, interior, grad_norm, iter, min_eig))
                } else {
                    Err(Error::SolverFailure {
                        iterations: iter,
                        grad: grad_norm,
                    })
                };
            }
        }
    }
    let eval = objective.evaluate(&c);
    Err(Error::SolverFailure {
        iterations: opts.max_iter,
        grad: dense::norm(&eval.grad),
    })
}

/// `P H P + nu P + c c^T / R^2` with `P = 1 - c c^T / R^2`.
fn project_hessian(h: &SymMatrix, c: &[f64], r2: f64, nu: f64) -> SymMatrix {
    let n = h.n;
    let hc = h.matvec(c);
    let chc = dense::dot(c, &hc);
    let mut out = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let pij = if i == j { 1.0 } else { 0.0 } - c[i] * c[j] / r2;
            let php = h.get(i, j) - c[i] * hc[j] / r2 - hc[i] * c[j] / r2 + c[i] * c[j] * chc / (r2 * r2);
            out.set(i, j, php + nu * pij + c[i] * c[j] / r2);
        }
    }
    out.symmetrize();
    out
}

/// Smallest Hessian eigenvalue below which a stationary point is treated as flat.
const FLAT_CURVATURE: f64 = 1e-7;

/// At a numerically stationary point, a flat Hessian direction `w` along
/// which the objective keeps decreasing to its infimum. By the monotonicity
/// of the relative entropy along e-geodesics this happens exactly when `rho`
/// lies in the exposed face `F(S(A), u)` of `u = sum_i w_i v_i`.
fn escape_direction(rho: &State, family: &ExponentialFamily, h: &SymMatrix) -> Option<Vec<f64>> {
    let (values, vectors) = h.eigen();
    for (l, w) in values.iter().zip(&vectors).rev() {
        if *l > FLAT_CURVATURE {
            break;
        }
        let u = family.parameter_direction(w);
        for sign in [1.0, -1.0] {
            let (_, p) = max_eig_data(&u.scale(sign));
            if !p.is_identity() && p.contains_support_of(rho) {
                return Some(w.iter().map(|x| sign * x).collect());
            }
        }
    }
    None
}

/// Largest `tau >= 0` with `||c + tau d|| <= cap`.
fn step_to_sphere(c: &[f64], d: &[f64], cap: f64) -> f64 {
    let dd = dense::dot(d, d);
    if dd == 0.0 {
        return f64::INFINITY;
    }
    let cd = dense::dot(c, d);
    let cc = dense::dot(c, c);
    (-cd + (cd * cd - dd * (cc - cap * cap)).max(0.0).sqrt()) / dd
}

/// `c + tau w` with `tau >= 0` and norm `cap`.
fn push_to_sphere(c: &[f64], w: &[f64], cap: f64) -> Vec<f64> {
    let cw = dense::dot(c, w);
    let cc = dense::dot(c, c);
    let tau = -cw + (cw * cw - cc + cap * cap).max(0.0).sqrt();
    let mut out: Vec<f64> = c.iter().zip(w).map(|(x, y)| x + tau * y).collect();
    radial_clip(&mut out, cap);
    out
}

fn finish(
    rho: &State,
    c: Vec<f64>,
    eval: Evaluation,
    attained: bool,
    grad_residual: f64,
    iterations: usize,
    min_hessian_eig: f64,
) -> ProjectionResult {
    let sigma_star = gibbs_from_spectrum(&eval.spectrum);
    let distance = if attained {
        relative_entropy(rho, &sigma_star).unwrap_or(f64::INFINITY)
    } else {
        (eval.value - vn_entropy(rho)).max(0.0)
    };
    ProjectionResult {
        theta_star: c,
        sigma_star,
        attained,
        grad_residual,
        iterations,
        distance,
        min_hessian_eig,
    }
}

/// `d_E(rho)` with the attainment flag.
pub fn entropy_distance(rho: &State, family: &ExponentialFamily, opts: &SolverOptions) -> Result<(f64, bool)> {
    let r = project_to_family(rho, family, opts)?;
    Ok((r.distance, r.attained))
}

/// One row of a continuation table.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationRow {
    pub cap: f64,
    pub value: f64,
    pub attained: bool,
}

/// Default continuation caps.
pub const CONTINUATION_CAPS: [f64; 4] = [10.0, 20.0, 40.0, 80.0];

/// Objective values for increasing caps, each solve warm-started from the
/// previous minimizer so the sequence is non-increasing.
pub fn entropy_distance_continuation(
    rho: &State,
    family: &ExponentialFamily,
    opts: &SolverOptions,
    caps: &[f64],
) -> Result<Vec<ContinuationRow>> {
    let mut start = vec![0.0; family.dim()];
    let mut rows = Vec::with_capacity(caps.len());
    let mut best = f64::INFINITY;
    for &cap in caps {
        let r = project_from(rho, family, &opts.with_cap(cap), start.clone())?;
        // The previous minimizer is feasible for a larger cap, so rounding
        // noise at the flat end of the objective must not raise the value.
        if r.distance <= best {
            best = r.distance;
            start = r.theta_star;
        }
        rows.push(ContinuationRow {
            cap,
            value: best,
            attained: r.attained,
        });
    }
    Ok(rows)
}

/// `|S(rho, sigma) + S(sigma, tau) - S(rho, tau)|`, valid when
/// `rho - sigma ⊥ ln tau - ln sigma`.
pub fn pythagorean_residual(rho: &State, sigma: &State, tau: &State) -> Result<f64> {
    let ls = sigma.element().ln().map_err(|_| Error::Singular(sigma.min_eigenvalue()))?;
    let lt = tau.element().ln().map_err(|_| Error::Singular(tau.min_eigenvalue()))?;
    if !sigma.is_invertible() {
        return Err(Error::Singular(sigma.min_eigenvalue()));
    }
    if !tau.is_invertible() {
        return Err(Error::Singular(tau.min_eigenvalue()));
    }
    let dl = &lt - &ls;
    let overlap = (rho.element() - sigma.element()).dot(&dl);
    if overlap.abs() > 1e-10 * dl.norm().max(1.0) {
        return Err(Error::Precondition(format!(
            "rho - sigma not orthogonal to ln tau - ln sigma (overlap {overlap:e})"
        )));
    }
    let a = relative_entropy(rho, sigma)?;
    let b = relative_entropy(sigma, tau)?;
    let c = relative_entropy(rho, tau)?;
    Ok((a + b - c).abs())
}

/// Mean-value coordinates `pi_V(a)`.
pub fn mean_value_projection(a: &HermitianElement, family: &ExponentialFamily) -> Vec<f64> {
    family.coordinates(a)
}
