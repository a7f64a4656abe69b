//! e-geodesic limits, compressed families `E^p`, the geodesic closure of a
//! 2D family as an atlas over maximal projectors, and entropy-distance
//! closure tests.

use std::f64::consts::TAU;
use std::io::Write;

use crate::corner::Corner;
use crate::error::{Error, Result};
use crate::expfam::{project_to_family, ExponentialFamily, ProjectionResult, SolverOptions};
use crate::report::{fmt_f64, Finding, Report};
use crate::scalar::Real;
use crate::state::{exposed_face_membership, max_eig_data, relative_entropy};
use crate::{HermitianElement, Projector, State};

/// Two projectors are grouped together when their images are this close.
pub const PROJECTOR_TOL: f64 = 1e-9;
/// Angular resolution of the transition search.
pub const TRANSITION_WIDTH: f64 = 1e-10;
/// Recursion limit for repeated face reduction.
const MAX_DEPTH: usize = 6;

/// Limit of the e-geodesic `lambda -> exp1(theta + lambda u)`.
#[derive(Clone, Debug)]
pub struct GeodesicLimit {
    pub state: State,
    /// `lim F(theta + lambda u) - lambda mu_+(u) = ln tr(p e^{p theta p})`.
    pub asymptote: f64,
    pub projector: Projector,
    pub mu_plus: f64,
}

pub fn egeodesic_limit(theta: &HermitianElement, u: &HermitianElement) -> Result<GeodesicLimit> {
    theta.same_algebra(u)?;
    let (mu_plus, projector) = max_eig_data(u);
    let corner = Corner::new(&projector)?;
    Ok(GeodesicLimit {
        state: corner.exp1(theta),
        asymptote: corner.free_energy(theta),
        projector,
        mu_plus,
    })
}

/// `E^p = exp1^p(c^p(Theta))`, held as a family on the reduced algebra of
/// `pAp` together with the corner that embeds it.
#[derive(Clone, Debug)]
pub struct CompressedFamily {
    corner: Corner<f64>,
    family: ExponentialFamily,
}

impl CompressedFamily {
    pub fn new(family: &ExponentialFamily, p: &Projector) -> Result<Self> {
        if p.algebra() != family.algebra() {
            return Err(Error::AlgebraMismatch(
                p.algebra().block_dims().to_vec(),
                family.algebra().block_dims().to_vec(),
            ));
        }
        let corner = Corner::new(p)?;
        let offset = corner.restrict(family.offset());
        let gens: Vec<_> = family.basis().iter().map(|v| corner.restrict(v)).collect();
        let reduced = ExponentialFamily::spanned_by(offset, &gens)?;
        Ok(Self {
            corner,
            family: reduced,
        })
    }

    pub fn projector(&self) -> &Projector {
        self.corner.projector()
    }

    pub fn corner(&self) -> &Corner<f64> {
        &self.corner
    }

    /// The family in reduced coordinates.
    pub fn reduced(&self) -> &ExponentialFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    /// Tangent space `c^p(V)` in ambient coordinates.
    pub fn tangent_basis(&self) -> Vec<HermitianElement> {
        self.family.basis().iter().map(|v| self.corner.embed(v)).collect()
    }

    pub fn state_at(&self, coords: &[f64]) -> State {
        self.corner.embed_state(&self.family.state_at(coords))
    }

    pub fn representative(&self) -> State {
        self.state_at(&vec![0.0; self.dim()])
    }

    /// Whether `rho` is a member of `E^p` within `tol`.
    pub fn contains(&self, rho: &State, tol: f64) -> bool {
        let Ok(r) = self.corner.restrict_state(rho) else {
            return false;
        };
        self.family.membership_defect(&r).is_some_and(|d| d <= tol)
    }

    /// Entropy-distance projection of a state supported in `p` onto `E^p`,
    /// carried out in the reduced algebra.
    pub fn project(&self, rho: &State, opts: &SolverOptions) -> Result<ProjectionResult> {
        let r = self.corner.restrict_state(rho)?;
        project_to_family(&r, &self.family, opts)
    }
}

/// Directions `u(alpha) = cos(alpha) a + sin(alpha) b` spanning `V` modulo
/// multiples of the identity, which do not change `p_+`.
#[derive(Clone, Debug)]
pub struct DirectionChart {
    a: HermitianElement,
    b: HermitianElement,
}

impl DirectionChart {
    /// Chart given by the orthonormal basis of a 2D family.
    pub fn orthonormal(family: &ExponentialFamily) -> Result<Self> {
        if family.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: family.dim(),
            });
        }
        Ok(Self {
            a: family.basis()[0].clone(),
            b: family.basis()[1].clone(),
        })
    }

    /// Chart with explicit generators, whose traceless parts must span `V`.
    pub fn new(family: &ExponentialFamily, a: HermitianElement, b: HermitianElement) -> Result<Self> {
        if family.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: family.dim(),
            });
        }
        for g in [&a, &b] {
            let d = family.tangent_defect(g);
            if d > 1e-9 * g.norm().max(1.0) {
                return Err(Error::NotInSubspace(d));
            }
        }
        let ca = family.coordinates(&a);
        let cb = family.coordinates(&b);
        let det = ca[0] * cb[1] - ca[1] * cb[0];
        if det.abs() <= 1e-12 * a.norm() * b.norm() {
            return Err(Error::RankDeficient(det.abs()));
        }
        Ok(Self { a, b })
    }

    pub fn direction(&self, alpha: f64) -> HermitianElement {
        let (s, c) = alpha.sin_cos();
        self.a.scale(c).axpy(s, &self.b)
    }
}

/// Maximal projectors of `u(alpha)` over a range of angles.
#[derive(Clone, Debug)]
pub struct AtlasGroup {
    pub projector: Projector,
    pub family: CompressedFamily,
    /// Closed angle intervals `[lo, hi]`; isolated directions have `lo == hi`.
    pub intervals: Vec<[f64; 2]>,
    pub n_directions: usize,
}

impl AtlasGroup {
    pub fn rank(&self) -> usize {
        self.projector.rank()
    }

    /// One direction of the group.
    pub fn alpha(&self) -> f64 {
        self.intervals[0][0]
    }
}

/// Sampled geodesic closure: `E` together with the families `E^p` of the
/// maximal projectors met by the swept directions.
#[derive(Clone, Debug)]
pub struct ClosureAtlas {
    pub n_directions: usize,
    pub groups: Vec<AtlasGroup>,
    /// Angles of isolated directions found between grid points.
    pub transitions: Vec<f64>,
}

impl ClosureAtlas {
    /// Group whose projector has the same image as `p`.
    pub fn group_of(&self, p: &Projector) -> Option<&AtlasGroup> {
        self.groups.iter().find(|g| same_projector(&g.projector, p))
    }

    /// Group containing the direction at `alpha`.
    pub fn group_at(&self, alpha: f64) -> Option<&AtlasGroup> {
        let a = alpha.rem_euclid(TAU);
        self.groups
            .iter()
            .find(|g| g.intervals.iter().any(|&[lo, hi]| lo - 1e-12 <= a && a <= hi + 1e-12))
    }

    /// Columns `alpha_lo,alpha_hi,projector_rank,family_dim` followed by the
    /// real and imaginary parts of the representative state's block entries.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        let n_entries = self.groups.first().map_or(0, |g| g.projector.element().entries().len());
        let mut header: Vec<String> = ["alpha_lo", "alpha_hi", "projector_rank", "family_dim"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for k in 0..n_entries {
            header.push(format!("rep_{k}_re"));
            header.push(format!("rep_{k}_im"));
        }
        w.write_record(&header).map_err(ser)?;
        let mut rows: Vec<(f64, f64, &AtlasGroup)> = self
            .groups
            .iter()
            .flat_map(|g| g.intervals.iter().map(move |&[lo, hi]| (lo, hi, g)))
            .collect();
        rows.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (lo, hi, g) in rows {
            let mut rec = vec![fmt_f64(lo), fmt_f64(hi), g.rank().to_string(), g.family.dim().to_string()];
            for z in g.family.representative().element().entries() {
                rec.push(fmt_f64(z.re));
                rec.push(fmt_f64(z.im));
            }
            w.write_record(&rec).map_err(ser)?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

fn same_projector(p: &Projector, q: &Projector) -> bool {
    p.rank() == q.rank() && (p.element() - q.element()).norm() <= 1e-6 && p.same_image(q, PROJECTOR_TOL)
}

/// Golden-section search for a minimizer of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, width: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > width {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
        if x1 >= x2 {
            break;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Groups the directions of a 2D family by `p_+(u(alpha))` over
/// `n_directions` equally spaced angles. Inside every grid interval the
/// direction with the smallest top eigenvalue gap is located to
/// `TRANSITION_WIDTH`; if its maximal projector is larger than at both grid
/// ends it is added to the atlas.
pub fn geodesic_closure_atlas(
    family: &ExponentialFamily,
    chart: &DirectionChart,
    n_directions: usize,
) -> Result<ClosureAtlas> {
    if family.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: family.dim(),
        });
    }
    if n_directions < crate::boundary::MIN_ANGLES {
        return Err(Error::UnderResolved(format!("{n_directions} directions")));
    }
    let proj = |a: f64| max_eig_data(&chart.direction(a)).1;
    let step = TAU / n_directions as f64;
    let grid: Vec<(f64, Projector)> = (0..n_directions).map(|j| (j as f64 * step, proj(j as f64 * step))).collect();

    // Isolated directions with a larger maximal projector sit at local minima
    // of the gap between the two largest eigenvalues.
    let top_gap = |a: f64| {
        let ev = chart.direction(a).eigh().eigenvalues();
        let gap = if ev.len() > 1 { ev[0] - ev[1] } else { f64::INFINITY };
        (gap, ev[0])
    };
    let mut samples: Vec<(f64, Projector)> = grid.clone();
    let mut transitions = Vec::new();
    for j in 0..n_directions {
        let (a, pa) = &grid[j];
        let (b, pb) = if j + 1 == n_directions {
            (TAU, &grid[0].1)
        } else {
            (grid[j + 1].0, &grid[j + 1].1)
        };
        let (at, _) = golden_min(|x| top_gap(x).0, *a, b, TRANSITION_WIDTH);
        let (gap, top) = top_gap(at);
        if gap > f64::top_gap() * (1.0 + top.abs()) {
            continue;
        }
        let p = proj(at);
        if p.rank() > pa.rank().max(pb.rank()) {
            let at = at.rem_euclid(TAU);
            transitions.push(at);
            samples.push((at, p));
        }
    }
    samples.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut groups: Vec<AtlasGroup> = Vec::new();
    // Index of the group of the previous sample, to extend runs.
    let mut last: Option<usize> = None;
    for (alpha, p) in samples {
        let k = match last.filter(|&k| same_projector(&groups[k].projector, &p)) {
            Some(k) => k,
            None => match groups.iter().position(|g| same_projector(&g.projector, &p)) {
                Some(k) => {
                    groups[k].intervals.push([alpha, alpha]);
                    groups[k].n_directions += 1;
                    last = Some(k);
                    continue;
                }
                None => {
                    groups.push(AtlasGroup {
                        family: CompressedFamily::new(family, &p)?,
                        projector: p,
                        intervals: vec![[alpha, alpha]],
                        n_directions: 1,
                    });
                    last = Some(groups.len() - 1);
                    continue;
                }
            },
        };
        let g = &mut groups[k];
        g.intervals.last_mut().expect("non-empty")[1] = alpha;
        g.n_directions += 1;
        last = Some(k);
    }
    Ok(ClosureAtlas {
        n_directions,
        groups,
        transitions,
    })
}

fn member_of_face(rho: &State, u: &HermitianElement) -> bool {
    matches!(exposed_face_membership(rho, u), Ok(true))
}

/// A direction `v ∈ V` with `rho ∈ F(S(A), v)` and `p_+(v) != 1`, preferring
/// the largest face. 2D families are searched with the closure atlas; other
/// dimensions try the basis directions and the direction of the constrained
/// minimizer.
pub fn exposing_direction(rho: &State, family: &ExponentialFamily, opts: &SolverOptions) -> Result<Option<HermitianElement>> {
    let mut candidates: Vec<HermitianElement> = Vec::new();
    match family.dim() {
        0 => return Ok(None),
        2 => {
            let chart = DirectionChart::orthonormal(family)?;
            let atlas = geodesic_closure_atlas(family, &chart, crate::boundary::DEFAULT_ANGLES)?;
            let mut groups: Vec<&AtlasGroup> = atlas.groups.iter().filter(|g| g.rank() > 1).collect();
            groups.sort_by(|x, y| y.rank().cmp(&x.rank()).then(x.alpha().total_cmp(&y.alpha())));
            candidates.extend(groups.iter().map(|g| chart.direction(g.alpha())));
            // Best supporting direction: maximize <rho, u> - mu_+(u) <= 0.
            let slack = |a: f64| {
                let u = chart.direction(a);
                rho.expect(&u) - u.eigh().max()
            };
            let n = atlas.n_directions;
            let step = TAU / n as f64;
            let j = (0..n)
                .map(|j| (j, slack(j as f64 * step)))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .map_or(0, |x| x.0);
            let centre = j as f64 * step;
            let (a, _) = golden_min(|a| -slack(a), centre - step, centre + step, TRANSITION_WIDTH);
            candidates.push(chart.direction(a));
        }
        _ => {
            for v in family.basis() {
                candidates.push(v.clone());
                candidates.push(-v);
            }
            let r = project_to_family(rho, family, opts)?;
            if !r.attained {
                candidates.push(family.parameter_direction(&r.theta_star));
            }
        }
    }
    Ok(candidates
        .into_iter()
        .find(|u| !max_eig_data(u).1.is_identity() && member_of_face(rho, u)))
}

fn face_distance(rho: &State, family: &ExponentialFamily, opts: &SolverOptions, depth: usize) -> Result<f64> {
    if family.dim() == 0 {
        return relative_entropy(rho, &family.state_at(&[]));
    }
    if depth < MAX_DEPTH {
        if let Some(v) = exposing_direction(rho, family, opts)? {
            return reduce_once(rho, family, &v, opts, depth);
        }
    }
    Ok(project_to_family(rho, family, opts)?.distance)
}

fn reduce_once(rho: &State, family: &ExponentialFamily, v: &HermitianElement, opts: &SolverOptions, depth: usize) -> Result<f64> {
    let (_, p) = max_eig_data(v);
    let cf = CompressedFamily::new(family, &p)?;
    let r = cf.corner().restrict_state(rho)?;
    face_distance(&r, cf.reduced(), opts, depth + 1)
}

/// `d_E(rho) = d_{E^p}(rho)` for `p = p_+(v)`, `rho ∈ F(S(A), v)`. Inside
/// `E^p` the reduction is repeated while the state lies in a proper exposed
/// face of the compressed state space.
pub fn reduce_distance_to_face(rho: &State, family: &ExponentialFamily, v: &HermitianElement, opts: &SolverOptions) -> Result<f64> {
    rho.element().same_algebra(v)?;
    let defect = family.tangent_defect(v);
    if defect > 1e-9 * v.norm().max(1.0) {
        return Err(Error::NotInSubspace(defect));
    }
    if v.traceless_part().norm() <= 1e-12 {
        return Err(Error::Precondition("direction must be non-zero in V".into()));
    }
    if !exposed_face_membership(rho, v)? {
        return Err(Error::NotInFace);
    }
    reduce_once(rho, family, v, opts, 0)
}

/// Entropy distance with face reduction whenever the state lies in a proper
/// exposed face; otherwise the direct constrained minimum.
pub fn reduced_entropy_distance(rho: &State, family: &ExponentialFamily, opts: &SolverOptions) -> Result<f64> {
    face_distance(rho, family, opts, 0)
}

/// Default threshold and cap for [`rI_membership`].
pub const RI_EPS: f64 = 1e-3;
pub const RI_CAP: f64 = 200.0;

/// `d_E(rho) < eps`, with face reduction first.
#[allow(non_snake_case)]
pub fn rI_membership(rho: &State, family: &ExponentialFamily, eps: f64, param_cap: f64) -> Result<bool> {
    let opts = SolverOptions::default().with_cap(param_cap);
    Ok(reduced_entropy_distance(rho, family, &opts)? < eps)
}

/// `min ||rho - exp1(theta)||_2` over `||theta|| <= cap` for a 2D family:
/// a polar grid followed by compass search.
pub fn norm_distance_2d(rho: &State, family: &ExponentialFamily, cap: f64) -> Result<f64> {
    if family.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: family.dim(),
        });
    }
    let f = |c: [f64; 2]| (family.state_at(&c).element() - rho.element()).norm();
    let mut best = ([0.0, 0.0], f([0.0, 0.0]));
    let n_radii = 24;
    for i in 1..=n_radii {
        let r = cap.powf(i as f64 / n_radii as f64);
        for j in 0..180 {
            let a = TAU * j as f64 / 180.0;
            let c = [r * a.cos(), r * a.sin()];
            let v = f(c);
            if v < best.1 {
                best = (c, v);
            }
        }
    }
    // Compass search in (radius, angle): near the boundary the valleys of
    // `f` run along rays, so Cartesian steps would crawl.
    let polar = |q: [f64; 2]| f([q[0] * q[1].cos(), q[0] * q[1].sin()]);
    let mut q = [best.0[0].hypot(best.0[1]), best.0[1].atan2(best.0[0])];
    let mut v = best.1;
    let mut h = [0.25 * q[0].max(1.0), TAU / 180.0];
    let mut evals = 0;
    while (h[0] > 1e-12 * cap || h[1] > 1e-14) && evals < 20_000 {
        let mut improved = false;
        for (k, sign) in [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)] {
            let mut t = q;
            t[k] += sign * h[k];
            t[0] = t[0].clamp(0.0, cap);
            let w = polar(t);
            evals += 1;
            if w < v {
                (q, v) = (t, w);
                improved = true;
            }
        }
        if !improved {
            h = [0.5 * h[0], 0.5 * h[1]];
        }
    }
    best.1 = best.1.min(v);
    Ok(best.1)
}

/// Outcome of sampling the chain `cl_geo(E) ⊂ cl_rI(E) ⊂ closure(E)`.
#[derive(Clone, Debug)]
pub struct InclusionSample {
    pub label: String,
    pub in_geodesic_closure: bool,
    pub entropy_distance: f64,
    pub norm_distance: f64,
}

/// Tests both inclusions on the atlas representatives and on extra
/// candidate states, with thresholds `eps` for the entropy distance and
/// `norm_eps` for the norm distance.
pub fn inclusion_chain_check(
    family: &ExponentialFamily,
    chart: &DirectionChart,
    atlas: &ClosureAtlas,
    candidates: &[(String, State)],
    eps: f64,
    norm_eps: f64,
    cap: f64,
) -> Result<(Report, Vec<InclusionSample>)> {
    let opts = SolverOptions::default().with_cap(cap);
    let mut samples = Vec::new();
    let mut worst_geo: f64 = 0.0;
    // Every representative lies in the face exposed by its own direction, so
    // the first reduction step needs no search. Rank-one groups are sampled.
    let stride = (atlas.groups.len() / 24).max(1);
    for (k, g) in atlas.groups.iter().enumerate() {
        if g.rank() == 1 && k % stride != 0 {
            continue;
        }
        let rep = g.family.representative();
        let d = reduce_distance_to_face(&rep, family, &chart.direction(g.alpha()), &opts)?;
        worst_geo = worst_geo.max(d);
    }
    for (label, rho) in candidates {
        let in_geo = atlas.groups.iter().any(|g| g.family.contains(rho, 1e-8))
            || family.membership_defect(rho).is_some_and(|d| d <= 1e-8);
        samples.push(InclusionSample {
            label: label.clone(),
            in_geodesic_closure: in_geo,
            entropy_distance: reduced_entropy_distance(rho, family, &opts)?,
            norm_distance: norm_distance_2d(rho, family, cap)?,
        });
    }
    let mut report = Report::new("inclusion chain");
    report.push(Finding::at_most("geodesic_closure_in_rI", worst_geo, eps));
    let worst_ri_norm = samples
        .iter()
        .filter(|s| s.entropy_distance < eps)
        .map(|s| s.norm_distance)
        .fold(0.0, f64::max);
    report.push(Finding::at_most("rI_in_norm_closure", worst_ri_norm, norm_eps));
    Ok((report, samples))
}

/// Abelian 2D example family on `C^4`.
pub fn abelian_example() -> ExponentialFamily {
    let a = crate::algebra::Algebra::abelian(4).expect("valid algebra");
    let g1 = HermitianElement::from_real_diagonal(&a, &[1.0, -1.0, 0.0, 0.0]).expect("diagonal");
    let g2 = HermitianElement::from_real_diagonal(&a, &[0.0, 1.0, -1.0, 0.5]).expect("diagonal");
    ExponentialFamily::linear(&a, &[g1, g2]).expect("independent generators")
}

/// Inclusion chain of a 2D family on the atlas representatives, random
/// family members and random states. For abelian algebras the three
/// closures must coincide on every sample.
pub fn closure_report(
    family: &ExponentialFamily,
    n_directions: usize,
    seed: u64,
) -> Result<(Report, ClosureAtlas, Vec<InclusionSample>)> {
    use rand::{Rng, SeedableRng};
    let chart = DirectionChart::orthonormal(family)?;
    let atlas = geodesic_closure_atlas(family, &chart, n_directions)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<(String, State)> = Vec::new();
    let stride = (atlas.groups.len() / 12).max(1);
    for (k, g) in atlas.groups.iter().enumerate().step_by(stride) {
        candidates.push((format!("geodesic_{k}"), g.family.representative()));
    }
    for k in 0..4 {
        let c: Vec<f64> = (0..family.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
        candidates.push((format!("member_{k}"), family.state_at(&c)));
    }
    for k in 0..4 {
        candidates.push((format!("random_{k}"), crate::sample::random_state(family.algebra(), &mut rng)));
    }
    // Sampled states sit at a positive distance from the family, so a tight
    // threshold separates them from limits; Pinsker fixes the norm threshold.
    let eps: f64 = 1e-6;
    let norm_eps = (2.0 * eps).sqrt();
    let (mut report, samples) = inclusion_chain_check(family, &chart, &atlas, &candidates, eps, norm_eps, RI_CAP)?;
    let in_ri = |s: &InclusionSample| s.entropy_distance < eps;
    let in_closure = |s: &InclusionSample| s.norm_distance < norm_eps;
    let ri_not_geo = samples.iter().filter(|s| in_ri(s) && !s.in_geodesic_closure).count();
    let closure_not_ri = samples.iter().filter(|s| in_closure(s) && !in_ri(s)).count();
    if family.algebra().is_abelian() {
        report.push(Finding::close("abelian_rI_minus_geodesic", ri_not_geo as f64, 0.0, 0.0));
        report.push(Finding::close("abelian_closure_minus_rI", closure_not_ri as f64, 0.0, 0.0));
    } else {
        report.push(Finding::observed("rI_minus_geodesic", ri_not_geo as f64));
        report.push(Finding::observed("closure_minus_rI", closure_not_ri as f64));
    }
    report.push(Finding::observed("atlas_groups", atlas.groups.len() as f64));
    Ok((report, atlas, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::cone;
    use crate::expfam::exp1;
    use std::f64::consts::{FRAC_PI_2, LN_2};

    fn diag(a: &Algebra, d: &[f64]) -> HermitianElement {
        HermitianElement::from_real_diagonal(a, d).unwrap()
    }

    #[test]
    fn limit_of_sigma3_geodesic() {
        let a = cone::qubit_plus_one();
        let l = egeodesic_limit(&HermitianElement::zero(&a), &cone::sigma3(0.0)).unwrap();
        assert!((l.state.element() - &diag(&a, &[1.0, 0.0, 0.0])).norm() < 1e-15);
        assert!(l.asymptote.abs() < 1e-15);
    }

    #[test]
    fn limit_along_identity_is_start() {
        let a = cone::qubit_plus_one();
        let theta = cone::sigma1(0.3).axpy(0.7, &cone::sigma3(0.0));
        let l = egeodesic_limit(&theta, &HermitianElement::identity(&a)).unwrap();
        assert!((l.state.element() - exp1(&theta).element()).norm() < 1e-14);
    }

    #[test]
    fn staffelberg_limit_at_zero_is_c() {
        let l = egeodesic_limit(&HermitianElement::zero(&cone::qubit_plus_one()), &cone::staffelberg_direction(0.0)).unwrap();
        assert!((l.state.element() - cone::staffelberg_c().element()).norm() < 1e-14);
        assert_eq!(l.projector.rank(), 2);
    }

    #[test]
    fn limit_matches_long_geodesic_for_block_compatible_theta() {
        let a = cone::qubit_plus_one();
        let u = cone::sigma3(0.0);
        let theta = diag(&a, &[0.4, -0.2, 1.1]);
        let l = egeodesic_limit(&theta, &u).unwrap();
        let lam = 40.0;
        let far = exp1(&theta.axpy(lam, &u));
        assert!((far.element() - l.state.element()).norm() < 1e-8);
        let f = crate::state::log_partition(&theta.axpy(lam, &u)) - lam * l.mu_plus;
        assert!((f - l.asymptote).abs() < 1e-8);
    }

    #[test]
    fn compressed_identity_is_family() {
        let fam = cone::staffelberg_family();
        let cf = CompressedFamily::new(&fam, &Projector::identity(fam.algebra())).unwrap();
        assert_eq!(cf.dim(), 2);
        assert!(cf.reduced().same_family(&fam, 1e-12));
    }

    #[test]
    fn staffelberg_face_family_is_c() {
        let fam = cone::staffelberg_family();
        let (_, p) = max_eig_data(&cone::staffelberg_direction(0.0));
        let cf = CompressedFamily::new(&fam, &p).unwrap();
        assert_eq!(cf.dim(), 0);
        assert!((cf.representative().element() - cone::staffelberg_c().element()).norm() < 1e-14);
    }

    #[test]
    fn swallow_face_family_is_open_segment() {
        let fam = cone::swallow_family();
        let (_, p) = max_eig_data(&cone::swallow_direction(0.0));
        assert_eq!(p.rank(), 2);
        let cf = CompressedFamily::new(&fam, &p).unwrap();
        assert_eq!(cf.dim(), 1);
        let r0 = cone::base_circle_state(0.0);
        let apex = cone::apex();
        for t in [-5.0, 0.0, 3.0] {
            let s = cf.state_at(&[t]);
            let w = s.expect(apex.element());
            assert!(w > 0.0 && w < 1.0);
            let seg = r0.mix(&apex, w).unwrap();
            assert!((s.element() - seg.element()).norm() < 1e-12);
        }
    }

    #[test]
    fn swallow_atlas_matches_expected_groups() {
        let fam = cone::swallow_family();
        let chart = cone::swallow_chart();
        for n in [720, 721] {
            let atlas = geodesic_closure_atlas(&fam, &chart, n).unwrap();
            let rank2: Vec<_> = atlas.groups.iter().filter(|g| g.rank() == 2).collect();
            assert_eq!(rank2.len(), 2, "n = {n}");
            let mut angles: Vec<f64> = rank2.iter().map(|g| g.alpha()).collect();
            angles.sort_by(f64::total_cmp);
            assert!(angles[0].min(TAU - angles[0]) < 1e-8, "{angles:?}");
            assert!((angles[1] - FRAC_PI_2).abs() < 1e-8, "{angles:?}");
            let apex_group = atlas.group_of(&max_eig_data(cone::apex().element()).1).unwrap();
            assert_eq!(apex_group.family.dim(), 0);
            assert!(apex_group.intervals.iter().all(|&[lo, hi]| lo > 0.0 && hi < FRAC_PI_2));
            for g in &atlas.groups {
                if g.rank() == 1 && !std::ptr::eq(g, apex_group) {
                    let a = g.alpha();
                    assert!(a > FRAC_PI_2 && a < TAU);
                    assert!(g.projector.same_image(&max_eig_data(cone::base_circle_state(a).element()).1, 1e-9));
                }
            }
        }
    }

    #[test]
    fn staffelberg_distance_on_segment() {
        let fam = cone::staffelberg_family();
        let v = cone::staffelberg_direction(0.0);
        let c = cone::staffelberg_c();
        let opts = SolverOptions::default();
        for w in [0.0, 0.25, 0.75, 1.0] {
            let rho = cone::base_circle_state(0.0).mix(&cone::apex(), w).unwrap();
            let d = reduce_distance_to_face(&rho, &fam, &v, &opts).unwrap();
            let expect = relative_entropy(&rho, &c).unwrap();
            assert!((d - expect).abs() < 1e-9, "w={w}: {d} vs {expect}");
        }
        let d0 = reduce_distance_to_face(&cone::base_circle_state(0.0), &fam, &v, &opts).unwrap();
        assert!((d0 - LN_2).abs() < 1e-9);
        assert!(reduce_distance_to_face(&c, &fam, &v, &opts).unwrap().abs() < 1e-12);
        assert!(matches!(
            reduce_distance_to_face(&cone::base_circle_state(1.0), &fam, &v, &opts),
            Err(Error::NotInFace)
        ));
    }

    #[test]
    fn swallow_corner_distance_vanishes() {
        let fam = cone::swallow_family();
        let opts = SolverOptions::default();
        let v = cone::swallow_direction(0.0);
        let d = reduce_distance_to_face(&cone::base_circle_state(0.0), &fam, &v, &opts).unwrap();
        assert!(d.abs() < 1e-12, "{d}");
        assert!(rI_membership(&cone::base_circle_state(0.0), &fam, RI_EPS, RI_CAP).unwrap());
        assert!(rI_membership(&cone::base_circle_state(FRAC_PI_2), &fam, RI_EPS, RI_CAP).unwrap());
    }

    #[test]
    fn ri_membership_examples() {
        let fam = cone::staffelberg_family();
        assert!(!rI_membership(&cone::base_circle_state(0.0), &fam, RI_EPS, RI_CAP).unwrap());
        assert!(rI_membership(&fam.state_at(&[0.4, -1.0]), &fam, RI_EPS, RI_CAP).unwrap());
        assert!(rI_membership(&cone::base_circle_state(0.3), &fam, RI_EPS, RI_CAP).unwrap());
    }

    #[test]
    fn abelian_atlas_groups_are_simplex_faces() {
        let a = Algebra::abelian(3).unwrap();
        let fam = ExponentialFamily::linear(&a, &[diag(&a, &[1.0, -1.0, 0.0]), diag(&a, &[1.0, 1.0, -2.0])]).unwrap();
        let atlas = geodesic_closure_atlas(&fam, &DirectionChart::orthonormal(&fam).unwrap(), 360).unwrap();
        // Three vertices and three edges of the simplex.
        assert_eq!(atlas.groups.len(), 6);
        assert_eq!(atlas.groups.iter().filter(|g| g.rank() == 1).count(), 3);
        assert_eq!(atlas.groups.iter().filter(|g| g.rank() == 2).count(), 3);
        for g in &atlas.groups {
            // Brute force: p_+ of a diagonal direction is the indicator of its maximal entries.
            let u = DirectionChart::orthonormal(&fam).unwrap().direction(g.alpha());
            let d: Vec<f64> = (0..3).map(|k| u.block(k)[(0, 0)].re).collect();
            let m = d.iter().cloned().fold(f64::MIN, f64::max);
            let ind: Vec<f64> = d.iter().map(|&x| if x >= m - 1e-9 { 1.0 } else { 0.0 }).collect();
            assert!((g.projector.element() - &diag(&a, &ind)).norm() < 1e-9);
        }
    }

    #[test]
    fn abelian_closures_coincide() {
        let (report, _, samples) = closure_report(&abelian_example(), 360, 1).unwrap();
        assert!(report.all_passed(), "{report:#?} {samples:#?}");
    }
}
