//! Boundary of the mean value set `pi_V(S(A))` of a 2D family by a sweep of
//! the support function, with exposed / non-exposed classification of the
//! endpoints of boundary segments.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::expfam::ExponentialFamily;
use crate::matrix::CMatrix;
use crate::scalar::Real;
use crate::HermitianElement;

/// Grid size below which a sweep is always considered under-resolved.
pub const MIN_ANGLES: usize = 16;
/// Default grid size.
pub const DEFAULT_ANGLES: usize = 720;
/// Angular offset of the probes that decide whether a segment endpoint is a corner.
pub const KINK_TOL: f64 = 1e-6;
/// Two boundary points closer than this are the same point.
pub const POINT_TOL: f64 = 1e-9;
/// Bisection stops at this angular width.
const BISECT_WIDTH: f64 = 1e-12;
/// A jump of at least this size surviving bisection is a segment.
const JUMP_TOL: f64 = 1e-6;

pub type Point = [f64; 2];

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Face of `mv(V)` exposed by `u(alpha) = cos(alpha) v_1 + sin(alpha) v_2`.
#[derive(Clone, Copy, Debug)]
pub struct Exposure {
    pub alpha: f64,
    /// `mu_+(u(alpha))`.
    pub support_value: f64,
    /// Endpoint reached from smaller angles.
    pub lo: Point,
    /// Endpoint reached from larger angles.
    pub hi: Point,
    /// Image of the top eigenvector alone (no gap tolerance).
    pub strict: Point,
    pub projector_rank: usize,
}

impl Exposure {
    pub fn is_segment(&self) -> bool {
        dist(self.lo, self.hi) > POINT_TOL
    }
}

/// Evaluates the exposed face of `mv(V)` for the direction at angle `alpha`.
pub fn exposed_face(family: &ExponentialFamily, alpha: f64) -> Result<Exposure> {
    if family.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: family.dim(),
        });
    }
    let (v1, v2) = (&family.basis()[0], &family.basis()[1]);
    let (s, c) = alpha.sin_cos();
    let u = v1.scale(c).axpy(s, v2);
    let u_perp = v1.scale(-s).axpy(c, v2);
    let spec = u.eigh();
    let top = spec.max();
    let gap = f64::top_gap() * (1.0 + top.abs());
    let top_pairs: Vec<_> = spec.eigenpairs().filter(|e| e.value >= top - gap).collect();
    let r = top_pairs.len();

    // Matrices of v_1, v_2, u_perp compressed to the top eigenspace; entries
    // between different blocks vanish.
    let compress = |a: &HermitianElement| {
        CMatrix::from_fn(r, |i, j| {
            let (x, y) = (&top_pairs[i], &top_pairs[j]);
            if x.block != y.block {
                return Complex::new(0.0, 0.0);
            }
            let m = a.block(x.block);
            let n = m.dim();
            let mut acc = Complex::new(0.0, 0.0);
            for p in 0..n {
                for q in 0..n {
                    acc += x.vector[p].conj() * m[(p, q)] * y.vector[q];
                }
            }
            acc
        })
    };
    let c1 = compress(v1);
    let c2 = compress(v2);
    let point = |coef: &[Complex<f64>]| -> Point {
        let quad = |m: &CMatrix<f64>| {
            let mut acc = Complex::new(0.0, 0.0);
            for i in 0..r {
                for j in 0..r {
                    acc += coef[i].conj() * m[(i, j)] * coef[j];
                }
            }
            acc.re
        };
        [quad(&c1), quad(&c2)]
    };
    let top_index = (0..r)
        .max_by(|&i, &j| top_pairs[i].value.total_cmp(&top_pairs[j].value))
        .unwrap_or(0);
    let mut unit = vec![Complex::new(0.0, 0.0); r];
    unit[top_index] = Complex::new(1.0, 0.0);
    let strict = point(&unit);
    let (lo, hi) = if r == 1 {
        (strict, strict)
    } else {
        let (_, vecs) = compress(&u_perp).jacobi_eigh();
        (point(&vecs.column(r - 1)), point(&vecs.column(0)))
    };
    Ok(Exposure {
        alpha,
        support_value: top,
        lo,
        hi,
        strict,
        projector_rank: r,
    })
}

/// One emitted boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryRow {
    pub alpha: f64,
    pub support_value: f64,
    pub point: Point,
    /// 1 for endpoints of a boundary segment, 0 otherwise.
    pub face_dim: u8,
    pub nonexposed: bool,
}

/// A boundary segment `[lo, hi]` exposed by the single direction `alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceSegment {
    pub alpha: f64,
    pub support_value: f64,
    pub lo: Point,
    pub hi: Point,
    pub lo_exposed: bool,
    pub hi_exposed: bool,
    /// Whether `alpha` is a grid angle (rather than located by bisection).
    pub on_grid: bool,
}

#[derive(Clone, Debug)]
pub struct MeanValueBoundary {
    pub n_angles: usize,
    pub rows: Vec<BoundaryRow>,
    pub segments: Vec<FaceSegment>,
}

/// Exposure type of a boundary vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    Exposed,
    NonExposed,
}

/// Sweeps `u(alpha)` over `n_angles` equally spaced angles, bisecting every
/// grid interval to locate directions that expose a segment.
pub fn mean_value_boundary_sweep(family: &ExponentialFamily, n_angles: usize) -> Result<MeanValueBoundary> {
    if family.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: family.dim(),
        });
    }
    if n_angles < MIN_ANGLES {
        return Err(Error::UnderResolved(format!(
            "{n_angles} angles (at least {MIN_ANGLES} required)"
        )));
    }
    let step = TAU / n_angles as f64;
    let grid: Vec<Exposure> = (0..n_angles)
        .map(|j| exposed_face(family, j as f64 * step))
        .collect::<Result<_>>()?;

    let mut segments = Vec::new();
    let mut rows = Vec::new();
    for j in 0..n_angles {
        let e = grid[j];
        if e.is_segment() {
            segments.push(classify_segment(family, e.alpha, e.support_value, e.lo, e.hi, true)?);
        } else {
            rows.push(row(e.alpha, e.support_value, e.lo, 0, false));
        }
        let next = if j + 1 == n_angles {
            Exposure {
                alpha: TAU,
                ..grid[0]
            }
        } else {
            grid[j + 1]
        };
        if let Some(jump) = locate_jump(family, (e.alpha, e.hi), (next.alpha, next.lo))? {
            let rest_lo = locate_jump(family, (e.alpha, e.hi), jump.0)?;
            let rest_hi = locate_jump(family, jump.1, (next.alpha, next.lo))?;
            if rest_lo.is_some() || rest_hi.is_some() {
                return Err(Error::UnderResolved(format!(
                    "several boundary segments between angles {} and {}",
                    e.alpha, next.alpha
                )));
            }
            let ((a, lo), (b, hi)) = jump;
            let alpha = 0.5 * (a + b);
            let h = exposed_face(family, alpha)?.support_value;
            segments.push(classify_segment(family, alpha, h, lo, hi, false)?);
        }
    }
    for s in &segments {
        rows.push(row(s.alpha, s.support_value, s.lo, 1, !s.lo_exposed));
        rows.push(row(s.alpha, s.support_value, s.hi, 1, !s.hi_exposed));
    }
    rows.sort_by(|x, y| x.alpha.total_cmp(&y.alpha).then(x.face_dim.cmp(&y.face_dim)));
    segments.sort_by(|x, y| x.alpha.total_cmp(&y.alpha));
    Ok(MeanValueBoundary {
        n_angles,
        rows,
        segments,
    })
}

fn row(alpha: f64, support_value: f64, point: Point, face_dim: u8, nonexposed: bool) -> BoundaryRow {
    BoundaryRow {
        alpha,
        support_value,
        point,
        face_dim,
        nonexposed,
    }
}

/// Bisects `[a, b]` toward the larger jump of the exposed point. Returns
/// the final bracketing points when a jump survives down to `BISECT_WIDTH`.
///
/// `left` is the point exposed just above `a`, `right` the one just below `b`;
/// interior angles use the strict top eigenvector.
fn locate_jump(
    family: &ExponentialFamily,
    (mut a, mut left): (f64, Point),
    (mut b, mut right): (f64, Point),
) -> Result<Option<((f64, Point), (f64, Point))>> {
    while b - a > BISECT_WIDTH {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let m = exposed_face(family, mid)?.strict;
        if dist(left, m) >= dist(m, right) {
            b = mid;
            right = m;
        } else {
            a = mid;
            left = m;
        }
    }
    Ok((dist(left, right) > JUMP_TOL).then_some(((a, left), (b, right))))
}

/// An endpoint is a corner (exposed) when a nearby direction on its side
/// exposes exactly that point; otherwise the only exposing direction is
/// `alpha`, which exposes the whole segment.
fn classify_segment(
    family: &ExponentialFamily,
    alpha: f64,
    support_value: f64,
    lo: Point,
    hi: Point,
    on_grid: bool,
) -> Result<FaceSegment> {
    let before = exposed_face(family, alpha - KINK_TOL)?;
    let after = exposed_face(family, alpha + KINK_TOL)?;
    Ok(FaceSegment {
        alpha,
        support_value,
        lo,
        hi,
        lo_exposed: dist(before.strict, lo) <= POINT_TOL,
        hi_exposed: dist(after.strict, hi) <= POINT_TOL,
        on_grid,
    })
}

/// Distinct segment endpoints with their exposure type. A point that is an
/// endpoint of several segments is exposed if any probe found it exposed.
pub fn classify_boundary_faces(boundary: &MeanValueBoundary) -> Vec<(Point, FaceKind)> {
    let mut out: Vec<(Point, FaceKind)> = Vec::new();
    for s in &boundary.segments {
        for (p, exposed) in [(s.lo, s.lo_exposed), (s.hi, s.hi_exposed)] {
            let kind = if exposed { FaceKind::Exposed } else { FaceKind::NonExposed };
            match out.iter_mut().find(|(q, _)| dist(*q, p) <= 1e3 * POINT_TOL) {
                Some(entry) => {
                    if kind == FaceKind::Exposed {
                        entry.1 = FaceKind::Exposed;
                    }
                }
                None => out.push((p, kind)),
            }
        }
    }
    out
}

impl MeanValueBoundary {
    pub fn nonexposed_count(&self) -> usize {
        classify_boundary_faces(self)
            .iter()
            .filter(|(_, k)| *k == FaceKind::NonExposed)
            .count()
    }

    pub fn nonexposed_points(&self) -> Vec<Point> {
        classify_boundary_faces(self)
            .into_iter()
            .filter(|(_, k)| *k == FaceKind::NonExposed)
            .map(|(p, _)| p)
            .collect()
    }

    /// `max_alpha |max_x <x, u(alpha)> - h(alpha)|` over the emitted points,
    /// evaluated at the emitted angles.
    pub fn support_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let (s, c) = r.alpha.sin_cos();
                let best = self
                    .rows
                    .iter()
                    .map(|q| c * q.point[0] + s * q.point[1])
                    .fold(f64::NEG_INFINITY, f64::max);
                (best - r.support_value).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Boundary polygon in angular order with repeated points removed.
    pub fn polygon(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            if out.last().is_none_or(|q| dist(*q, r.point) > POINT_TOL) {
                out.push(r.point);
            }
        }
        while out.len() > 1 && dist(out[0], *out.last().unwrap()) <= POINT_TOL {
            out.pop();
        }
        out
    }

    /// CSV with columns `alpha,support_value,x1,x2,face_dim,nonexposed_flag`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        w.write_record(["alpha", "support_value", "x1", "x2", "face_dim", "nonexposed_flag"])
            .map_err(ser)?;
        for r in &self.rows {
            w.write_record([
                crate::report::fmt_f64(r.alpha),
                crate::report::fmt_f64(r.support_value),
                crate::report::fmt_f64(r.point[0]),
                crate::report::fmt_f64(r.point[1]),
                r.face_dim.to_string(),
                u8::from(r.nonexposed).to_string(),
            ])
            .map_err(ser)?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}
