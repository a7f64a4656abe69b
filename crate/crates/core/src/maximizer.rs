//! Directional derivatives of the entropy distance, the local-maximizer
//! certificate `rho = exp1^p(p theta p)`, and a projected-gradient search for
//! local maximizers inside a face `{rho : supp(rho) ⊂ p}`.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corner::Corner;
use crate::error::{Error, Result};
use crate::expfam::{project_from, project_to_family, ExponentialFamily, ProjectionResult, SolverOptions};
use crate::report::{fmt_f64, Finding, Report, Table};
use crate::sample;
use crate::spectral::{frechet_with_spectrum, Ln};
use crate::state::{log_partition, support_projector};
use crate::{HermitianElement, Projector, State};

/// Eigenvalue floor used when `ln^p` is evaluated on the boundary of a face.
const LN_FLOOR: f64 = 1e-16;

fn supported_in(p: &Projector, u: &HermitianElement) -> Result<()> {
    let leak = (u - &u.sandwich(p.element())).norm();
    if leak > 1e-10 * u.norm().max(1.0) {
        return Err(Error::NotSupported(leak));
    }
    Ok(())
}

/// `D ln^p|_rho (u)` for `u ∈ pAp`, `p = supp(rho)`, by divided differences.
pub fn dlnp(rho: &State, u: &HermitianElement) -> Result<HermitianElement> {
    rho.element().same_algebra(u)?;
    let p = support_projector(rho);
    supported_in(&p, u)?;
    let corner = Corner::new(&p)?;
    let r = corner.restrict(rho.element());
    let spec = r.eigh();
    if spec.min() <= f64::EPSILON {
        return Err(Error::Singular(spec.min()));
    }
    Ok(corner.embed(&frechet_with_spectrum(&spec, &corner.restrict(u), &Ln)?))
}

/// Projection data needed by the derivative and the certificate.
struct Projected {
    result: ProjectionResult,
    theta: HermitianElement,
}

fn projected(rho: &State, family: &ExponentialFamily, opts: &SolverOptions) -> Result<Projected> {
    let result = project_to_family(rho, family, opts)?;
    let theta = family.parameter(&result.theta_star);
    Ok(Projected { result, theta })
}

/// `ln^p(rho)` on `p = supp(rho)`, eigenvalues floored at `LN_FLOOR`.
fn ln_on_support(corner: &Corner<f64>, rho: &State) -> HermitianElement {
    let r = corner.restrict(rho.element());
    corner.embed(&r.eigh().map(|l| l.max(LN_FLOOR).ln()))
}

/// `<u, ln^p(rho) - theta>` with `theta = ln0(pi_E(rho))`.
pub fn de_directional_derivative(rho: &State, u: &HermitianElement, family: &ExponentialFamily) -> Result<f64> {
    rho.element().same_algebra(u)?;
    let t = u.trace();
    if t.abs() > 1e-10 * u.norm().max(1.0) {
        return Err(Error::NotTraceless(t));
    }
    let p = support_projector(rho);
    supported_in(&p, u)?;
    let pr = projected(rho, family, &SolverOptions::default())?;
    if !pr.result.attained {
        return Err(Error::ProjectionNotAttained);
    }
    let corner = Corner::new(&p)?;
    Ok(u.dot(&(&ln_on_support(&corner, rho) - &pr.theta)))
}

/// Fourth-order central difference of `d_E` along `u` with step `h`. The
/// two-point stencil has truncation error `h^2 |d_E'''| / 6`, and the third
/// derivative grows like `1/lambda_min^2` on nearly singular states.
pub fn de_finite_difference(rho: &State, u: &HermitianElement, family: &ExponentialFamily, h: f64) -> Result<f64> {
    let opts = SolverOptions::default();
    let d = |s: f64| -> Result<f64> {
        let moved = State::new(rho.element().axpy(s * h, u))?;
        Ok(project_to_family(&moved, family, &opts)?.distance)
    };
    Ok((8.0 * (d(1.0)? - d(-1.0)?) - (d(2.0)? - d(-2.0)?)) / (12.0 * h))
}

#[derive(Clone, Debug)]
pub struct MaximizerCertificate {
    pub state: State,
    pub support: Projector,
    /// `ln0(pi_E(rho))`, from the capped minimizer when not attained.
    pub theta: HermitianElement,
    pub attained: bool,
    /// `exp1^p(p theta p)`.
    pub imprint: State,
    /// `||rho - exp1^p(p theta p)||_2`.
    pub residual: f64,
    /// `F(theta) - F^p(p theta p)`.
    pub certified_value: f64,
    /// Norm of `c^p(ln^p(rho) - theta)`, the gradient of `d_E` over traceless
    /// directions of `pAp`.
    pub gradient_norm: f64,
    /// `d_E(rho)` from the projection solver.
    pub entropy_distance: f64,
    /// Residual within the tolerance.
    pub holds: bool,
}

impl MaximizerCertificate {
    /// `|certified_value - entropy_distance|`.
    pub fn value_mismatch(&self) -> f64 {
        (self.certified_value - self.entropy_distance).abs()
    }
}

/// Evaluates the necessary condition `rho = exp1^p(p theta p)` for `rho` to
/// be a local maximizer of `d_E`, `p = supp(rho)`.
pub fn maximizer_certificate(rho: &State, family: &ExponentialFamily, tol: f64) -> Result<MaximizerCertificate> {
    certificate_with(rho, family, tol, &SolverOptions::default(), None)
}

fn certificate_with(
    rho: &State,
    family: &ExponentialFamily,
    tol: f64,
    opts: &SolverOptions,
    start: Option<Vec<f64>>,
) -> Result<MaximizerCertificate> {
    if rho.algebra() != family.algebra() {
        return Err(Error::AlgebraMismatch(
            rho.algebra().block_dims().to_vec(),
            family.algebra().block_dims().to_vec(),
        ));
    }
    let result = match start {
        Some(s) => project_from(rho, family, opts, s)?,
        None => project_to_family(rho, family, opts)?,
    };
    let theta = family.parameter(&result.theta_star);
    let support = support_projector(rho);
    let corner = Corner::new(&support)?;
    let imprint = corner.exp1(&theta);
    let residual = rho.distance(&imprint);
    let certified_value = log_partition(&theta) - corner.free_energy(&theta);
    let grad = corner.restrict(&(&ln_on_support(&corner, rho) - &theta)).traceless_part();
    Ok(MaximizerCertificate {
        state: rho.clone(),
        support,
        theta,
        attained: result.attained,
        imprint,
        residual,
        certified_value,
        gradient_norm: grad.norm(),
        entropy_distance: result.distance,
        holds: residual <= tol,
    })
}

/// `p sigma p / tr(p sigma)`.
pub fn truncate_renormalize(sigma: &State, p: &Projector) -> Result<State> {
    State::from_positive(&sigma.element().sandwich(p.element()))
}

/// Writes certificates with columns `index,entropy_distance,residual,certified_value,
/// gradient_norm,attained,holds` followed by the state's block entries.
pub fn write_certificates_csv<W: Write>(rows: &[MaximizerCertificate], out: W) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    let n_entries = rows.first().map_or(0, |c| c.state.element().entries().len());
    let mut header: Vec<String> = [
        "index",
        "entropy_distance",
        "residual",
        "certified_value",
        "gradient_norm",
        "attained",
        "holds",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for k in 0..n_entries {
        header.push(format!("rho_{k}_re"));
        header.push(format!("rho_{k}_im"));
    }
    w.write_record(&header).map_err(ser)?;
    for (i, c) in rows.iter().enumerate() {
        let mut rec = vec![
            i.to_string(),
            fmt_f64(c.entropy_distance),
            fmt_f64(c.residual),
            fmt_f64(c.certified_value),
            fmt_f64(c.gradient_norm),
            u8::from(c.attained).to_string(),
            u8::from(c.holds).to_string(),
        ];
        for z in c.state.element().entries() {
            rec.push(fmt_f64(z.re));
            rec.push(fmt_f64(z.im));
        }
        w.write_record(&rec).map_err(ser)?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub starts: usize,
    pub steps: usize,
    pub seed: u64,
    /// Stop when the projected gradient falls below this.
    pub gradient_tol: f64,
    /// Residual tolerance of the final certificates.
    pub certificate_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            starts: 4,
            steps: 200,
            seed: 0,
            gradient_tol: 1e-7,
            certificate_tol: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchStatus {
    Converged,
    /// Armijo step underflowed before the gradient test was met.
    Stagnated,
    StepLimit,
}

#[derive(Clone, Debug)]
pub struct SearchCandidate {
    pub start_index: usize,
    pub value: f64,
    pub iterations: usize,
    /// Projected-gradient norm at the last iterate.
    pub projected_gradient: f64,
    pub status: SearchStatus,
    pub certificate: MaximizerCertificate,
}

/// Euclidean projection of a reduced-algebra element onto the trace-one
/// positive elements, by projecting its spectrum onto the simplex.
fn project_to_states(a: &HermitianElement) -> Result<State> {
    let spec = a.eigh();
    let mut ev = spec.eigenvalues();
    ev.sort_by(|x, y| y.total_cmp(x));
    let mut cum = 0.0;
    let mut shift = 0.0;
    for (k, &l) in ev.iter().enumerate() {
        cum += l;
        let t = (cum - 1.0) / (k + 1) as f64;
        if l - t > 0.0 {
            shift = t;
        }
    }
    State::from_positive(&spec.map(|l| (l - shift).max(0.0)))
}

/// Projected-gradient ascent of `d_E` over states supported in `p`, from
/// `starts` random states drawn with `seed`.
pub fn local_max_search(family: &ExponentialFamily, p: &Projector, opts: &SearchOptions) -> Result<Vec<SearchCandidate>> {
    if p.algebra() != family.algebra() {
        return Err(Error::AlgebraMismatch(
            p.algebra().block_dims().to_vec(),
            family.algebra().block_dims().to_vec(),
        ));
    }
    let corner = Corner::new(p)?;
    let solver = SolverOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::with_capacity(opts.starts);
    for start_index in 0..opts.starts {
        let r0 = sample::random_invertible_state(corner.reduced(), &mut rng, 0.05);
        let mut rho = corner.embed_state(&r0);
        let mut pr = project_to_family(&rho, family, &solver)?;
        let mut status = SearchStatus::StepLimit;
        let mut step = 1.0;
        let mut iterations = 0;
        let mut projected_gradient = f64::INFINITY;
        while iterations < opts.steps {
            iterations += 1;
            let theta = family.parameter(&pr.theta_star);
            let r = corner.restrict(rho.element());
            let ln_r = r.eigh().map(|l| l.max(LN_FLOOR).ln());
            let grad = (&ln_r - &corner.restrict(&theta)).traceless_part();

            let moved = |s: f64| -> Result<(State, State)> {
                let cand = project_to_states(&r.axpy(s, &grad))?;
                Ok((corner.embed_state(&cand), cand))
            };
            // Projected gradient at unit scale decides stationarity.
            let (_, unit) = moved(1e-3)?;
            projected_gradient = (unit.element() - &r).norm() / 1e-3;
            if projected_gradient <= opts.gradient_tol {
                status = SearchStatus::Converged;
                break;
            }
            let mut s = step;
            let mut accepted = false;
            while s > 1e-14 {
                let (next, next_r) = moved(s)?;
                let delta = next_r.element() - &r;
                let gain = grad.dot(&delta);
                let cand = project_from(&next, family, &solver, pr.theta_star.clone())?;
                if cand.distance >= pr.distance + 1e-4 * gain && delta.norm() > 0.0 {
                    rho = next;
                    pr = cand;
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            if !accepted {
                status = SearchStatus::Stagnated;
                break;
            }
            step = (2.0 * s).min(1e3);
        }
        let certificate = certificate_with(&rho, family, opts.certificate_tol, &solver, Some(pr.theta_star.clone()))?;
        out.push(SearchCandidate {
            start_index,
            value: pr.distance,
            iterations,
            projected_gradient,
            status,
            certificate,
        });
    }
    Ok(out)
}

/// Relative error of the analytic derivative against the central
/// difference, with an absolute floor for directions of zero slope.
pub fn derivative_relative_error(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-6)
}

/// Finite-difference table over `n_pairs` random `(rho, u)`, local searches
/// inside the face of `p` and their certificates.
pub fn maximizer_report(
    family: &ExponentialFamily,
    p: &Projector,
    n_pairs: usize,
    seed: u64,
) -> Result<(Report, Table, Vec<MaximizerCertificate>)> {
    let alg = family.algebra();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(["index", "analytic", "finite_difference", "relative_error"]);
    let mut worst: f64 = 0.0;
    for k in 0..n_pairs {
        let rho = sample::random_invertible_state(alg, &mut rng, 0.05);
        let u = sample::random_traceless(alg, &mut rng, 1.0);
        let a = de_directional_derivative(&rho, &u, family)?;
        let f = de_finite_difference(&rho, &u, family, 1e-4)?;
        let e = derivative_relative_error(a, f);
        worst = worst.max(e);
        table.push(vec![k.to_string(), fmt_f64(a), fmt_f64(f), fmt_f64(e)]);
    }
    let opts = SearchOptions {
        seed,
        ..SearchOptions::default()
    };
    let found = local_max_search(family, p, &opts)?;
    let certs: Vec<MaximizerCertificate> = found.iter().map(|c| c.certificate.clone()).collect();
    let mut report = Report::new("maximizer");
    report.push(Finding::at_most("derivative_fd_relative_error", worst, 1e-5));
    let mismatch = certs
        .iter()
        .filter(|c| c.residual <= 1e-10)
        .map(MaximizerCertificate::value_mismatch)
        .fold(0.0, f64::max);
    report.push(Finding::at_most("certificate_value_mismatch", mismatch, 1e-8));
    let lowest = certs.iter().map(|c| c.certified_value).fold(f64::INFINITY, f64::min);
    report.push(Finding::at_least("certified_value_non_negative", lowest, -1e-12));
    let best = found.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);
    report.push(Finding::observed("search_best_value", best));
    let converged = found.iter().filter(|c| c.status == SearchStatus::Converged).count();
    report.push(Finding::observed("search_converged", converged as f64));
    Ok((report, table, certs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::cone;
    use crate::state::{max_eig_data, relative_entropy};
    use std::f64::consts::LN_2;

    fn diag(a: &Algebra, d: &[f64]) -> HermitianElement {
        HermitianElement::from_real_diagonal(a, d).unwrap()
    }

    #[test]
    fn dlnp_diagonal_divided_differences() {
        let a = Algebra::abelian(3).unwrap();
        let rho = State::new(diag(&a, &[0.5, 0.3, 0.2])).unwrap();
        let u = diag(&a, &[1.0, -2.0, 0.5]);
        let d = dlnp(&rho, &u).unwrap();
        for (k, (&l, &x)) in [0.5, 0.3, 0.2].iter().zip(&[1.0, -2.0, 0.5]).enumerate() {
            assert!((d.block(k)[(0, 0)].re - x / l).abs() < 1e-13);
        }
    }

    #[test]
    fn dlnp_of_rho_is_support() {
        let rho = cone::staffelberg_c();
        let d = dlnp(&rho, rho.element()).unwrap();
        assert!((&d - support_projector(&rho).element()).norm() < 1e-12);
    }

    #[test]
    fn dlnp_matches_integral_and_finite_difference() {
        let alg = cone::qubit_plus_one();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = sample::random_invertible_state(&alg, &mut rng, 0.05);
        let u = sample::random_hermitian(&alg, &mut rng, 1.0);
        let d = dlnp(&rho, &u).unwrap();
        // Integral over s in (0, inf), substituting s = e^x, log-spaced midpoint rule.
        let n = 10_000;
        let (lo, hi) = (-30.0f64, 30.0f64);
        let dx = (hi - lo) / n as f64;
        let mut acc = HermitianElement::zero(&alg);
        let spec = rho.element().eigh();
        for k in 0..n {
            let s = (lo + (k as f64 + 0.5) * dx).exp();
            let inv = spec.map(|l| 1.0 / (l + s));
            acc = acc.axpy(s * dx, &u.sandwich(&inv));
        }
        assert!((&acc - &d).norm() < 1e-6 * d.norm(), "{}", (&acc - &d).norm());
        let h = 1e-5;
        let lp = rho.element().axpy(h, &u).eigh().map(f64::ln);
        let lm = rho.element().axpy(-h, &u).eigh().map(f64::ln);
        let fd = (&lp - &lm).scale(0.5 / h);
        assert!((&fd - &d).norm() < 1e-7 * d.norm().max(1.0));
    }

    #[test]
    fn dlnp_rejects_unsupported_direction() {
        let rho = cone::base_circle_state(0.0);
        assert!(matches!(dlnp(&rho, &cone::sigma3(0.0)), Err(Error::NotSupported(_))));
    }

    #[test]
    fn derivative_vanishes_on_family() {
        let fam = cone::swallow_family();
        let rho = fam.state_at(&[0.3, -0.8]);
        let alg = cone::qubit_plus_one();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let u = sample::random_traceless(&alg, &mut rng, 1.0);
            assert!(de_directional_derivative(&rho, &u, &fam).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let fam = cone::staffelberg_family();
        let alg = cone::qubit_plus_one();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let rho = sample::random_invertible_state(&alg, &mut rng, 0.05);
            let u = sample::random_traceless(&alg, &mut rng, 1.0);
            let a = de_directional_derivative(&rho, &u, &fam).unwrap();
            let f = de_finite_difference(&rho, &u, &fam, 1e-4).unwrap();
            assert!((a - f).abs() <= 1e-5 * a.abs().max(f.abs()), "{a} vs {f}");
        }
    }

    #[test]
    fn certificate_on_family_member() {
        let fam = cone::staffelberg_family();
        let c = maximizer_certificate(&fam.state_at(&[0.2, 0.1]), &fam, 1e-10).unwrap();
        assert!(c.holds && c.attained);
        assert!(c.certified_value.abs() < 1e-12);
        assert!(c.entropy_distance.abs() < 1e-12);
    }

    #[test]
    fn staffelberg_c_certificate() {
        let fam = cone::staffelberg_family();
        let c = maximizer_certificate(&cone::staffelberg_c(), &fam, 1e-10).unwrap();
        assert!(!c.attained);
        assert!(c.holds, "residual {}", c.residual);
        assert!(c.value_mismatch() < 1e-8);
        assert!(c.certified_value >= 0.0);
    }

    #[test]
    fn abelian_certificate_is_truncation() {
        let a = Algebra::abelian(4).unwrap();
        let fam = ExponentialFamily::linear(&a, &[diag(&a, &[1.0, 2.0, 3.0, 4.0])]).unwrap();
        let rho = State::new(diag(&a, &[0.6, 0.0, 0.0, 0.4])).unwrap();
        let c = maximizer_certificate(&rho, &fam, 1e-10).unwrap();
        assert!(c.attained);
        let sigma = fam.state_at(&project_to_family(&rho, &fam, &SolverOptions::default()).unwrap().theta_star);
        let t = truncate_renormalize(&sigma, &support_projector(&rho)).unwrap();
        assert!(c.imprint.distance(&t) < 1e-10);
        assert!((c.residual - rho.distance(&t)).abs() < 1e-10);
    }

    #[test]
    fn segment_search_matches_grid() {
        let a = Algebra::abelian(3).unwrap();
        let fam = ExponentialFamily::linear(&a, &[diag(&a, &[1.0, -1.0, 0.2])]).unwrap();
        let p = Projector::new(diag(&a, &[1.0, 1.0, 0.0])).unwrap();
        let opts = SolverOptions::default();
        let d = |w: f64| {
            let rho = State::new(diag(&a, &[w, 1.0 - w, 0.0])).unwrap();
            project_to_family(&rho, &fam, &opts).unwrap().distance
        };
        // Golden-section refinement of a grid maximum.
        let (mut lo, mut hi) = (0.01f64, 0.99f64);
        let best = (1..100).map(|k| k as f64 / 100.0).max_by(|x, y| d(*x).total_cmp(&d(*y))).unwrap();
        lo = lo.max(best - 0.01);
        hi = hi.min(best + 0.01);
        while hi - lo > 1e-9 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if d(m1) < d(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let w_star = 0.5 * (lo + hi);
        let found = local_max_search(&fam, &p, &SearchOptions::default()).unwrap();
        for c in &found {
            assert_eq!(c.status, SearchStatus::Converged, "{c:?}");
            let w = c.certificate.state.element().block(0)[(0, 0)].re;
            assert!((w - w_star).abs() < 1e-6, "{w} vs {w_star}");
            assert!(c.certificate.holds);
            assert!(c.certificate.value_mismatch() < 1e-8);
        }
    }

    #[test]
    fn full_family_has_zero_distance() {
        let a = Algebra::abelian(3).unwrap();
        let fam = ExponentialFamily::linear(&a, &[diag(&a, &[1.0, -1.0, 0.0]), diag(&a, &[1.0, 1.0, -2.0])]).unwrap();
        let found = local_max_search(&fam, &Projector::identity(&a), &SearchOptions { starts: 2, ..Default::default() }).unwrap();
        for c in found {
            assert!(c.value.abs() < 1e-10);
        }
    }

    #[test]
    fn staffelberg_face_maximum_is_ln2() {
        let fam = cone::staffelberg_family();
        let (_, p) = max_eig_data(&cone::staffelberg_direction(0.0));
        let found = local_max_search(&fam, &p, &SearchOptions::default()).unwrap();
        let best = found.iter().map(|c| c.value).fold(f64::MIN, f64::max);
        assert!((best - LN_2).abs() < 1e-6, "{best}");
        for c in &found {
            let rho = &c.certificate.state;
            let s = relative_entropy(rho, &cone::staffelberg_c()).unwrap();
            assert!((c.value - s).abs() < 1e-6);
        }
    }

    #[test]
    fn staffelberg_maximizer_report() {
        let fam = cone::staffelberg_family();
        let (_, p) = max_eig_data(&cone::staffelberg_direction(0.0));
        let (report, table, certs) = maximizer_report(&fam, &p, 20, 1).unwrap();
        assert!(report.all_passed(), "{report:#?}");
        assert_eq!(table.rows.len(), 20);
        assert_eq!(certs.len(), SearchOptions::default().starts);
        assert!((report.get("search_best_value").unwrap().value - LN_2).abs() < 1e-6);
    }
}
