//! The algebra `Mat(2,C) ⊕ C`: the cone model of its state space, planes by
//! angle, and the Staffelberg and swallow families.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, LN_2, SQRT_2, TAU};

use num_complex::Complex;
use rand::Rng;

use crate::algebra::Algebra;
use crate::boundary::{mean_value_boundary_sweep, MeanValueBoundary};
use crate::closures::{
    geodesic_closure_atlas, rI_membership, reduce_distance_to_face, AtlasGroup, ClosureAtlas, DirectionChart, RI_CAP,
    RI_EPS,
};
use crate::error::{Error, Result};
use crate::expfam::{
    entropy_distance_continuation, exp1, ln0, project_to_family, ContinuationRow, ExponentialFamily, SolverOptions,
};
use crate::report::{fmt_f64, Finding, Report, Table};
use crate::sample;
use crate::state::{max_eig_data, relative_entropy};
use crate::{HermitianElement, State};

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

/// `Mat(2,C) ⊕ C`.
pub fn qubit_plus_one() -> Algebra {
    Algebra::new(vec![2, 1]).expect("valid algebra")
}

/// `m ⊕ s` for a 2x2 row-major matrix `m`.
pub fn block_element(m: [Complex<f64>; 4], s: f64) -> HermitianElement {
    HermitianElement::from_block_entries(&qubit_plus_one(), vec![m.to_vec(), vec![c(s, 0.0)]])
        .expect("hermitian input")
}

/// `sigma_1 ⊕ s`.
pub fn sigma1(s: f64) -> HermitianElement {
    block_element([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], s)
}

/// `sigma_2 ⊕ s`.
pub fn sigma2(s: f64) -> HermitianElement {
    block_element([c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)], s)
}

/// `sigma_3 ⊕ s`.
pub fn sigma3(s: f64) -> HermitianElement {
    block_element([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)], s)
}

/// `1_2 ⊕ s`.
pub fn id2(s: f64) -> HermitianElement {
    block_element([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], s)
}

/// The apex `0_2 ⊕ 1`.
pub fn apex() -> State {
    State::new(block_element([c(0.0, 0.0); 4], 1.0)).expect("pure state")
}

/// Base circle `rho(alpha) = (1 + sin(alpha) sigma_1 + cos(alpha) sigma_2)/2 ⊕ 0`.
pub fn base_circle_state(alpha: f64) -> State {
    let (s, co) = alpha.sin_cos();
    let e = id2(0.0).axpy(s, &sigma1(0.0)).axpy(co, &sigma2(0.0)).scale(0.5);
    State::new(e).expect("pure state")
}

/// `c = rho(0)/2 + (0_2 ⊕ 1/2)`.
pub fn staffelberg_c() -> State {
    base_circle_state(0.0).mix(&apex(), 0.5).expect("same algebra")
}

/// Fixed geometry of the cone `C = conv(K, 0_2 ⊕ 1)`.
#[derive(Clone, Debug)]
pub struct ConeModel {
    pub algebra: Algebra,
    /// `z = -1_2/2 ⊕ 1`.
    pub z: HermitianElement,
    /// Orthonormal basis of `W = span{sigma_1 ⊕ 0, sigma_2 ⊕ 0}`.
    pub w_basis: [HermitianElement; 2],
    /// Orthonormal basis of `U = W + Rz`.
    pub u_basis: [HermitianElement; 3],
    pub tracial: State,
    pub apex: State,
    /// `v_3 = -rho(0) ⊕ 1`.
    pub v3: HermitianElement,
}

impl Default for ConeModel {
    fn default() -> Self {
        Self::new()
    }
}

impl ConeModel {
    pub fn new() -> Self {
        let z = id2(1.0).axpy(-1.5, &id2(0.0));
        let w1 = sigma1(0.0).scale(1.0 / SQRT_2);
        let w2 = sigma2(0.0).scale(1.0 / SQRT_2);
        let zn = z.scale(1.0 / z.norm());
        let v3 = &block_element([c(0.0, 0.0); 4], 1.0) - base_circle_state(0.0).element();
        Self {
            algebra: qubit_plus_one(),
            w_basis: [w1.clone(), w2.clone()],
            u_basis: [w1, w2, zn],
            z,
            tracial: State::tracial(&qubit_plus_one()),
            apex: apex(),
            v3,
        }
    }

    /// Orthogonal projection onto `U`.
    pub fn project_u(&self, a: &HermitianElement) -> HermitianElement {
        self.u_basis
            .iter()
            .fold(HermitianElement::zero(&self.algebra), |acc, v| acc.axpy(a.dot(v), v))
    }

    /// Norm of the component of `a` orthogonal to `U`.
    pub fn u_defect(&self, a: &HermitianElement) -> f64 {
        (a - &self.project_u(a)).norm()
    }

    /// Signed margin of `y` in `C`: non-negative iff `y ∈ C`. Points off the
    /// affine hull `1/3 + U` get `-inf`-like margins through the defect term.
    pub fn cone_margin(&self, y: &HermitianElement) -> f64 {
        let off = self.u_defect(&(y - self.tracial.element()));
        let s = y.block(1)[(0, 0)].re;
        let w = self.w_basis.iter().map(|v| y.dot(v).powi(2)).sum::<f64>().sqrt();
        let disk = (1.0 - s) / SQRT_2 - w;
        (-off).min(s).min(1.0 - s).min(disk)
    }

    pub fn contains(&self, y: &HermitianElement, tol: f64) -> bool {
        self.cone_margin(y) >= -tol
    }

    /// `pi_U(rho) + 1/3`.
    pub fn cone_image(&self, rho: &State) -> HermitianElement {
        let t = self.tracial.element();
        &self.project_u(&(rho.element() - t)) + t
    }
}

/// Orthonormal basis of `V(phi) = span{sigma_1 ⊕ 0, sin(phi) sigma_2 ⊕ 0 / sqrt 2 + cos(phi) z/|z|}`.
pub fn plane_for_angle(phi: f64) -> Result<[HermitianElement; 2]> {
    if !(0.0..=FRAC_PI_2).contains(&phi) {
        return Err(Error::OutOfRange(format!("angle {phi} outside [0, pi/2]")));
    }
    let m = ConeModel::new();
    let (s, co) = phi.sin_cos();
    let second = m.u_basis[1].scale(s).axpy(co, &m.u_basis[2]);
    Ok([m.u_basis[0].clone(), second])
}

/// Linear family with tangent space `V(phi)`.
pub fn cone_family(phi: f64) -> Result<ExponentialFamily> {
    let [a, b] = plane_for_angle(phi)?;
    ExponentialFamily::linear(&qubit_plus_one(), &[a, b])
}

/// `arccos(|pi_V z| / |z|)` for a 2D plane `V ⊂ U` given by any basis.
pub fn angle_of_plane(generators: &[HermitianElement]) -> Result<f64> {
    let m = ConeModel::new();
    for g in generators {
        if g.algebra() != &m.algebra {
            return Err(Error::AlgebraMismatch(g.algebra().block_dims().to_vec(), m.algebra.block_dims().to_vec()));
        }
        let d = m.u_defect(g);
        if d > 1e-9 * g.norm().max(1.0) {
            return Err(Error::NotInSubspace(d));
        }
    }
    let fam = ExponentialFamily::linear(&m.algebra, generators)?;
    if fam.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: fam.dim(),
        });
    }
    let ratio = fam.tangent_part(&m.z).norm() / m.z.norm();
    Ok(ratio.clamp(0.0, 1.0).acos())
}

/// Shape of `mv(V(phi))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeClass {
    Triangle,
    EllipsePlusCornerWithTwoNonExposed,
    Ellipse,
}

impl ShapeClass {
    pub fn nonexposed_count(self) -> usize {
        match self {
            ShapeClass::EllipsePlusCornerWithTwoNonExposed => 2,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShapeClass::Triangle => "triangle",
            ShapeClass::EllipsePlusCornerWithTwoNonExposed => "ellipse+corner",
            ShapeClass::Ellipse => "ellipse",
        }
    }
}

const ANGLE_TOL: f64 = 1e-12;

pub fn classify_by_angle(phi: f64) -> Result<ShapeClass> {
    if !(0.0..=FRAC_PI_2 + ANGLE_TOL).contains(&phi) {
        return Err(Error::OutOfRange(format!("angle {phi} outside [0, pi/2]")));
    }
    Ok(if phi <= ANGLE_TOL {
        ShapeClass::Triangle
    } else if phi < FRAC_PI_3 - ANGLE_TOL {
        ShapeClass::EllipsePlusCornerWithTwoNonExposed
    } else {
        ShapeClass::Ellipse
    })
}

/// Raw generators `sigma_1 ⊕ 0` and `sigma_2 ⊕ 1 - 1/3`.
pub fn staffelberg_generators() -> [HermitianElement; 2] {
    [sigma1(0.0), sigma2(1.0).shift(-1.0 / 3.0)]
}

pub fn staffelberg_family() -> ExponentialFamily {
    ExponentialFamily::linear(&qubit_plus_one(), &staffelberg_generators()).expect("independent generators")
}

/// `u(alpha) = sin(alpha) sigma_1 ⊕ 0 + cos(alpha) (sigma_2 ⊕ 1)`.
pub fn staffelberg_direction(alpha: f64) -> HermitianElement {
    let (s, co) = alpha.sin_cos();
    sigma1(0.0).scale(s).axpy(co, &sigma2(1.0))
}

/// `sigma(alpha, t) = exp1(t u(alpha))` by its closed form, with numerator and
/// denominator multiplied by `e^{-t}` so large `t` does not overflow.
pub fn staffelberg_sigma(alpha: f64, t: f64) -> Result<State> {
    if !(t >= 0.0) {
        return Err(Error::OutOfRange(format!("t = {t} must be non-negative")));
    }
    let (s, co) = alpha.sin_cos();
    let e2 = (-2.0 * t).exp();
    let ch = 0.5 * (1.0 + e2);
    let sh = 0.5 * (1.0 - e2);
    let last = ((co - 1.0) * t).exp();
    let norm = 1.0 + e2 + last;
    let block = id2(0.0)
        .scale(ch)
        .axpy(sh * s, &sigma1(0.0))
        .axpy(sh * co, &sigma2(0.0));
    let e = (&block + &block_element([c(0.0, 0.0); 4], last)).scale(1.0 / norm);
    State::new(e)
}

/// `z(alpha, t) = T(alpha, t) <sigma(alpha, t), v_3>`.
pub fn staffelberg_z(alpha: f64, t: f64) -> f64 {
    let co = alpha.cos();
    -co * t.sinh() - t.cosh() + (co * t).exp()
}

/// `d/dt z(alpha, t)`.
pub fn staffelberg_z_dt(alpha: f64, t: f64) -> f64 {
    let co = alpha.cos();
    -co * t.cosh() - t.sinh() + co * (co * t).exp()
}

/// `tau(lambda) = (1 - lambda/2) rho(0) ⊕ lambda/2`.
pub fn staffelberg_tau(lambda: f64) -> Result<State> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange(format!("lambda = {lambda} outside [0, 1]")));
    }
    base_circle_state(0.0).mix(&apex(), 0.5 * lambda)
}

/// `sigma(alpha(t), t)` with `alpha(t) = sqrt((2/t) ln((2 - lambda)/lambda))`.
pub fn staffelberg_tau_path(lambda: f64, t: f64) -> Result<State> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::OutOfRange(format!("lambda = {lambda} outside (0, 1)")));
    }
    if !(t > 0.0) {
        return Err(Error::OutOfRange(format!("t = {t} must be positive")));
    }
    let alpha = ((2.0 / t) * ((2.0 - lambda) / lambda).ln()).sqrt();
    staffelberg_sigma(alpha, t)
}

/// Chart with `u(alpha) = sin(alpha) sigma_1 ⊕ 0 + cos(alpha) (sigma_2 ⊕ 1)`.
pub fn staffelberg_chart() -> DirectionChart {
    DirectionChart::new(&staffelberg_family(), sigma2(1.0), sigma1(0.0)).expect("generators span V")
}

/// Raw generators `sigma_1 ⊕ 1 - 1/3` and `sigma_2 ⊕ 1 - 1/3`.
pub fn swallow_generators() -> [HermitianElement; 2] {
    [sigma1(1.0).shift(-1.0 / 3.0), sigma2(1.0).shift(-1.0 / 3.0)]
}

pub fn swallow_family() -> ExponentialFamily {
    ExponentialFamily::linear(&qubit_plus_one(), &swallow_generators()).expect("independent generators")
}

/// `u(alpha) = sin(alpha) (sigma_1 ⊕ 1) + cos(alpha) (sigma_2 ⊕ 1)`.
pub fn swallow_direction(alpha: f64) -> HermitianElement {
    let (s, co) = alpha.sin_cos();
    sigma1(1.0).scale(s).axpy(co, &sigma2(1.0))
}

/// Chart with `u(alpha) = sin(alpha) (sigma_1 ⊕ 1) + cos(alpha) (sigma_2 ⊕ 1)`.
pub fn swallow_chart() -> DirectionChart {
    DirectionChart::new(&swallow_family(), sigma2(1.0), sigma1(1.0)).expect("generators span V")
}

/// `beta(a, b) = eta(a) eta(b) + xi(a) xi(b) + (eta + xi)(a + b)/3 - 7/9` with
/// `eta = <., v_1>`, `xi = <., v_2>` for the raw swallow generators.
pub fn swallow_beta(a: &HermitianElement, b: &HermitianElement) -> f64 {
    let [v1, v2] = swallow_generators();
    let (ea, eb) = (a.dot(&v1), b.dot(&v1));
    let (xa, xb) = (a.dot(&v2), b.dot(&v2));
    ea * eb + xa * xb + (ea + eb + xa + xb) / 3.0 - 7.0 / 9.0
}

/// Polar of the projected apex with respect to the projected base circle.
#[derive(Clone, Debug)]
pub struct PolarTangents {
    /// `pi_V(rho(0))`, `pi_V(rho(pi/2))` in the orthonormal swallow basis.
    pub tangent_points: [[f64; 2]; 2],
    /// `max_alpha |beta(rho(alpha), rho(alpha))|` over the grid.
    pub conic_residual: f64,
    /// `max(|beta(rho(0), apex)|, |beta(rho(pi/2), apex)|)`.
    pub polar_residual: f64,
    /// `beta(1/3, 1/3)`.
    pub center_value: f64,
}

pub fn swallow_polar_tangents(n_angles: usize) -> PolarTangents {
    let fam = swallow_family();
    let apex = apex();
    let conic_residual = (0..n_angles)
        .map(|k| {
            let r = base_circle_state(std::f64::consts::TAU * k as f64 / n_angles as f64);
            swallow_beta(r.element(), r.element()).abs()
        })
        .fold(0.0, f64::max);
    let r0 = base_circle_state(0.0);
    let r1 = base_circle_state(FRAC_PI_2);
    let polar_residual = swallow_beta(r0.element(), apex.element())
        .abs()
        .max(swallow_beta(r1.element(), apex.element()).abs());
    let t = State::tracial(&qubit_plus_one());
    let p0 = fam.coordinates(r0.element());
    let p1 = fam.coordinates(r1.element());
    PolarTangents {
        tangent_points: [[p0[0], p0[1]], [p1[0], p1[1]]],
        conic_residual,
        polar_residual,
        center_value: swallow_beta(t.element(), t.element()),
    }
}

/// Residuals of the three cone identities on random samples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConeIdentityReport {
    pub samples: usize,
    /// (i) worst membership margin of `pi_U(rho) + 1/3` over sampled states.
    pub projected_margin: f64,
    /// (i) worst distance of a sampled extreme point of `C` to its own image.
    pub extreme_fixed_residual: f64,
    /// (i) worst distance of the images of `rho(alpha)` and the apex to the
    /// relative boundary of `C`.
    pub extreme_boundary_residual: f64,
    /// (ii) number of points of `1/3 + U` where positivity and cone
    /// membership disagree by more than the tolerance.
    pub intersection_mismatches: usize,
    /// (iii) worst membership margin of `exp1(theta)`, `theta ∈ U`.
    pub exp_margin: f64,
    /// (iii) worst distance between a relative-interior point of `C` and
    /// `exp1(theta)`, `theta ∈ U`, `|theta| <= cap`.
    pub interior_approx: f64,
    /// Largest `|theta|` needed in (iii).
    pub max_param_norm: f64,
}

impl ConeIdentityReport {
    pub fn passes(&self, tol: f64, approx_tol: f64) -> bool {
        self.projected_margin >= -tol
            && self.extreme_fixed_residual <= tol
            && self.extreme_boundary_residual <= tol
            && self.intersection_mismatches == 0
            && self.exp_margin >= -tol
            && self.interior_approx <= approx_tol
    }
}

/// Samples the identities `C = pi_U(S(A)) + 1/3 = (1/3 + U) ∩ S(A)` and
/// `C = closure of exp1(U)`. Membership decisions use `tol`; `cap` bounds the
/// parameters used to approximate interior points.
pub fn cone_identity_residuals<R: Rng + ?Sized>(n_samples: usize, tol: f64, cap: f64, rng: &mut R) -> ConeIdentityReport {
    let m = ConeModel::new();
    let alg = qubit_plus_one();
    let mut rep = ConeIdentityReport {
        samples: n_samples,
        projected_margin: f64::INFINITY,
        exp_margin: f64::INFINITY,
        ..Default::default()
    };

    for k in 0..n_samples {
        let rho = if k % 2 == 0 {
            sample::random_state(&alg, rng)
        } else {
            sample::random_pure(&alg, rng)
        };
        rep.projected_margin = rep.projected_margin.min(m.cone_margin(&m.cone_image(&rho)));
    }
    let mut extremes: Vec<State> = (0..n_samples.max(1))
        .map(|_| base_circle_state(rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    extremes.push(apex());
    for e in &extremes {
        let img = m.cone_image(e);
        rep.extreme_fixed_residual = rep.extreme_fixed_residual.max((&img - e.element()).norm());
        rep.extreme_boundary_residual = rep.extreme_boundary_residual.max(m.cone_margin(&img).abs());
    }

    for _ in 0..n_samples {
        // Points of 1/3 + U spread over a region larger than C.
        let coef: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = m
            .u_basis
            .iter()
            .zip(&coef)
            .fold(m.tracial.element().clone(), |acc, (v, &x)| acc.axpy(x, v));
        let psd_margin = y.eigh().min();
        let cone = m.cone_margin(&y);
        let decided = psd_margin.abs() > tol && cone.abs() > tol;
        if decided && (psd_margin >= 0.0) != (cone >= 0.0) {
            rep.intersection_mismatches += 1;
        }
    }

    for _ in 0..n_samples {
        let coef: Vec<f64> = (0..3).map(|_| rng.random_range(-8.0..8.0)).collect();
        let theta = m
            .u_basis
            .iter()
            .zip(&coef)
            .fold(HermitianElement::zero(&alg), |acc, (v, &x)| acc.axpy(x, v));
        rep.exp_margin = rep.exp_margin.min(m.cone_margin(exp1(&theta).element()));

        // Relative-interior point of C: convex weights on the apex and a
        // disk point, kept a little away from the relative boundary.
        let s = rng.random_range(1e-3..0.999);
        let radius = rng.random_range(0.0..0.999);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let disk = base_circle_state(phase)
            .element()
            .scale(0.5 * (1.0 + radius))
            .axpy(0.5 * (1.0 - radius), base_circle_state(phase + std::f64::consts::PI).element());
        let y = State::new(disk.scale(1.0 - s).axpy(s, apex().element())).expect("state");
        let mut th = m.project_u(&ln0(&y).expect("interior point"));
        let n = th.norm();
        if n > cap {
            th = th.scale(cap / n);
        }
        rep.max_param_norm = rep.max_param_norm.max(n);
        rep.interior_approx = rep.interior_approx.max((exp1(&th).element() - y.element()).norm());
    }
    rep
}

/// `p_+(u)` and `mu_+(u)` for the named directions; convenience for reports.
pub fn maximal_projector_of(u: &HermitianElement) -> (f64, crate::Projector) {
    max_eig_data(u)
}

/// Findings of a named-family report together with the artifacts they were
/// computed from.
#[derive(Clone, Debug)]
pub struct FamilyReport {
    pub findings: Report,
    /// Columns `cap,value,attained` of the direct minimization at `rho(0)`.
    pub continuation: Table,
    pub atlas: ClosureAtlas,
    pub boundary: MeanValueBoundary,
}

fn continuation_table(rows: &[ContinuationRow]) -> Table {
    let mut t = Table::new(["cap", "value", "attained"]);
    for r in rows {
        t.push(vec![fmt_f64(r.cap), fmt_f64(r.value), u8::from(r.attained).to_string()]);
    }
    t
}

fn non_increasing(rows: &[ContinuationRow]) -> bool {
    rows.windows(2).all(|w| w[1].value <= w[0].value)
}

/// Caps of the direct minimization in the named-family reports.
pub const REPORT_CAPS: [f64; 5] = [10.0, 20.0, 40.0, 80.0, 200.0];

/// Numerical witnesses for the closures of the Staffelberg family and the
/// discontinuity of its entropy distance at `rho(0)`.
pub fn staffelberg_report(n_angles: usize) -> Result<FamilyReport> {
    let fam = staffelberg_family();
    let opts = SolverOptions::default();
    let mut rep = Report::new("staffelberg");
    let c = staffelberg_c();
    let r0 = base_circle_state(0.0);
    let v0 = staffelberg_direction(0.0);
    let m = ConeModel::new();

    // (a) geodesic closure = E ∪ B ∪ {c}.
    let atlas = geodesic_closure_atlas(&fam, &staffelberg_chart(), n_angles)?;
    let rank2: Vec<&AtlasGroup> = atlas.groups.iter().filter(|g| g.rank() > 1).collect();
    rep.push(Finding::close("atlas_large_projector_groups", rank2.len() as f64, 1.0, 0.0));
    if let Some(g) = rank2.first() {
        rep.push(Finding::at_most("atlas_c_direction", g.alpha().min(TAU - g.alpha()), 1e-8));
        rep.push(Finding::close("atlas_c_family_dim", g.family.dim() as f64, 0.0, 0.0));
        rep.push(Finding::at_most("atlas_c_state", g.family.representative().distance(&c), 1e-12));
    }
    let circle_err = atlas
        .groups
        .iter()
        .filter(|g| g.rank() == 1)
        .map(|g| g.family.representative().distance(&base_circle_state(g.alpha())) + g.family.dim() as f64)
        .fold(0.0, f64::max);
    rep.push(Finding::at_most("atlas_base_circle", circle_err, 1e-9));

    // (b) d_E(rho) = S(rho, c) on [rho(0), 0 ⊕ 1].
    let (mut seg_exact, mut seg_direct) = (0.0f64, 0.0f64);
    for k in 0..=10 {
        let w = k as f64 / 10.0;
        let rho = r0.mix(&apex(), w)?;
        let s = relative_entropy(&rho, &c)?;
        let d = reduce_distance_to_face(&rho, &fam, &v0, &opts)?;
        seg_exact = seg_exact.max((d - s).abs());
        let direct = project_to_family(&rho, &fam, &opts)?.distance;
        seg_direct = seg_direct.max((direct - s).abs());
    }
    rep.push(Finding::at_most("segment_reduced_vs_relative_entropy", seg_exact, 1e-9));
    rep.push(Finding::at_most("segment_direct_vs_reduced", seg_direct, 1e-6));
    let mid = c.mix(&apex(), 0.5)?;
    rep.push(Finding::at_least(
        "upper_segment_midpoint_distance",
        reduce_distance_to_face(&mid, &fam, &v0, &opts)?,
        1e-3,
    ));

    // (c) discontinuity at rho(0).
    let exact = reduce_distance_to_face(&r0, &fam, &v0, &opts)?;
    rep.push(Finding::close("distance_rho0_exact", exact, LN_2, 1e-9));
    let rows = entropy_distance_continuation(&r0, &fam, &opts, &REPORT_CAPS)?;
    rep.push(Finding::holds("distance_rho0_direct_non_increasing", non_increasing(&rows)));
    let at80 = rows.iter().find(|r| r.cap == 80.0).map_or(f64::NAN, |r| r.value);
    rep.push(Finding::at_most("distance_rho0_direct_cap80", at80, LN_2 + 5e-3));
    rep.push(Finding::holds("distance_rho0_not_attained", rows.iter().all(|r| !r.attained)));
    let d03 = project_to_family(&base_circle_state(0.3), &fam, &opts.with_cap(200.0))?.distance;
    rep.push(Finding::at_most("distance_rho_0.3_direct_cap200", d03, 1e-2));
    let along_b = (1..24)
        .map(|k| {
            let a = TAU * k as f64 / 24.0;
            reduce_distance_to_face(&base_circle_state(a), &fam, &staffelberg_direction(a), &opts)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rep.push(Finding::at_most("distance_on_base_circle_reduced", along_b, 1e-12));

    // (d) tau path and the half-space certificate.
    let tau = staffelberg_tau(0.5)?;
    let e1 = staffelberg_tau_path(0.5, 1e4)?.distance(&tau);
    let e2 = staffelberg_tau_path(0.5, 2e4)?.distance(&tau);
    rep.push(Finding::at_most("tau_path_error_t1e4", e1, 1e-2));
    rep.push(Finding::holds("tau_path_error_decreases", e2 < e1));
    let (mut sup_v3, mut sup_dz) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for i in 0..72 {
        let a = TAU * i as f64 / 72.0;
        for j in 0..=50 {
            let t = j as f64;
            sup_v3 = sup_v3.max(staffelberg_sigma(a, t)?.expect(&m.v3));
            sup_dz = sup_dz.max(staffelberg_z_dt(a, t) / t.cosh());
        }
    }
    rep.push(Finding::at_most("half_space_family_sup", sup_v3, 1e-15));
    rep.push(Finding::at_most("half_space_dz_dt_sup", sup_dz, 1e-12));
    rep.push(Finding::at_least("half_space_upper_segment_margin", mid.expect(&m.v3), 0.25));

    let boundary = mean_value_boundary_sweep(&fam, n_angles)?;
    rep.push(Finding::close("mean_value_nonexposed_count", boundary.nonexposed_count() as f64, 0.0, 0.0));
    Ok(FamilyReport {
        findings: rep,
        continuation: continuation_table(&rows),
        atlas,
        boundary,
    })
}

/// Numerical witnesses for the closures of the swallow family.
pub fn swallow_report(n_angles: usize) -> Result<FamilyReport> {
    let fam = swallow_family();
    let opts = SolverOptions::default();
    let mut rep = Report::new("swallow");
    let r0 = base_circle_state(0.0);
    let r1 = base_circle_state(FRAC_PI_2);
    let ap = apex();

    let atlas = geodesic_closure_atlas(&fam, &swallow_chart(), n_angles)?;
    let rank2: Vec<&AtlasGroup> = atlas.groups.iter().filter(|g| g.rank() == 2).collect();
    rep.push(Finding::close("atlas_rank2_groups", rank2.len() as f64, 2.0, 0.0));
    let on_segment = |g: &AtlasGroup, end: &State| -> f64 {
        // Distance of the E^p representative from ]end, 0 ⊕ 1[, plus a
        // penalty if it sits at an endpoint.
        let s = g.family.representative();
        let w = s.expect(ap.element());
        let inside = if w > 1e-9 && w < 1.0 - 1e-9 { 0.0 } else { 1.0 };
        end.mix(&ap, w).map_or(f64::INFINITY, |e| e.distance(&s)) + inside + (g.family.dim() as f64 - 1.0).abs()
    };
    let circ = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d)
    };
    let nearest = |target: f64| {
        rank2
            .iter()
            .min_by(|x, y| circ(x.alpha(), target).total_cmp(&circ(y.alpha(), target)))
            .copied()
    };
    if let (Some(g0), Some(g1)) = (nearest(0.0), nearest(FRAC_PI_2)) {
        rep.push(Finding::at_most("atlas_transition_at_0", circ(g0.alpha(), 0.0), 1e-8));
        rep.push(Finding::at_most("atlas_transition_at_pi_2", circ(g1.alpha(), FRAC_PI_2), 1e-8));
        rep.push(Finding::at_most("atlas_segment_rho0_apex", on_segment(g0, &r0), 1e-12));
        rep.push(Finding::at_most("atlas_segment_rho_pi_2_apex", on_segment(g1, &r1), 1e-12));
    }
    let apex_group = atlas.group_of(&max_eig_data(ap.element()).1);
    rep.push(Finding::holds(
        "atlas_apex_on_open_quarter",
        apex_group.is_some_and(|g| {
            g.family.dim() == 0 && g.intervals.iter().all(|&[lo, hi]| lo > 0.0 && hi < FRAC_PI_2) && g.n_directions > 0
        }),
    ));
    let circle_ok = atlas.groups.iter().filter(|g| g.rank() == 1).all(|g| {
        let is_apex = apex_group.is_some_and(|a| std::ptr::eq(a, g));
        is_apex
            || (g.alpha() > FRAC_PI_2
                && g.alpha() < TAU
                && g.family.dim() == 0
                && g.family.representative().distance(&base_circle_state(g.alpha())) <= 1e-9)
    });
    rep.push(Finding::holds("atlas_base_circle_arc", circle_ok));

    let v0 = swallow_direction(0.0);
    let v1 = swallow_direction(FRAC_PI_2);
    rep.push(Finding::at_most("distance_rho0_reduced", reduce_distance_to_face(&r0, &fam, &v0, &opts)?, 1e-12));
    rep.push(Finding::at_most("distance_rho_pi_2_reduced", reduce_distance_to_face(&r1, &fam, &v1, &opts)?, 1e-12));
    rep.push(Finding::holds("rI_rho0", rI_membership(&r0, &fam, RI_EPS, RI_CAP)?));
    rep.push(Finding::holds("rI_rho_pi_2", rI_membership(&r1, &fam, RI_EPS, RI_CAP)?));
    rep.push(Finding::holds(
        "geodesic_closure_misses_rho0",
        !atlas.groups.iter().any(|g| g.family.contains(&r0, 1e-8)),
    ));

    let boundary = mean_value_boundary_sweep(&fam, n_angles)?;
    let nonexposed = boundary.nonexposed_points();
    let target = |rho: &State| {
        let c = fam.coordinates(rho.element());
        nonexposed
            .iter()
            .map(|p| (p[0] - c[0]).hypot(p[1] - c[1]))
            .fold(f64::INFINITY, f64::min)
    };
    rep.push(Finding::close("mean_value_nonexposed_count", nonexposed.len() as f64, 2.0, 0.0));
    rep.push(Finding::at_most("nonexposed_at_rho0", target(&r0), 1e-6));
    rep.push(Finding::at_most("nonexposed_at_rho_pi_2", target(&r1), 1e-6));

    let polar = swallow_polar_tangents(360);
    rep.push(Finding::at_most("beta_conic_residual", polar.conic_residual, 1e-12));
    rep.push(Finding::at_most("beta_polar_residual", polar.polar_residual, 1e-12));
    rep.push(Finding::close("beta_center_value", polar.center_value, -7.0 / 9.0, 1e-15));

    let rows = entropy_distance_continuation(&r0, &fam, &opts, &REPORT_CAPS)?;
    rep.push(Finding::holds("distance_rho0_direct_non_increasing", non_increasing(&rows)));
    let at200 = rows.last().map_or(f64::NAN, |r| r.value);
    rep.push(
        Finding::at_most("distance_rho0_direct_cap200", at200, 1e-2)
            .with_note("slow decay of the constrained infimum in the cap"),
    );
    Ok(FamilyReport {
        findings: rep,
        continuation: continuation_table(&rows),
        atlas,
        boundary,
    })
}
