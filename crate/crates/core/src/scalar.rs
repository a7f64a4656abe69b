//! Real scalar abstraction used by the linear-algebra and state layers.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point type the spectral layer is generic over.
///
/// The tolerance hooks let the same Jacobi / divided-difference code run in
/// single or double precision; the double-precision values are the ones
/// every numeric contract in this crate is stated against.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative off-diagonal mass at which a Jacobi sweep stops.
    fn jacobi_tol() -> Self;
    /// Eigenvalue gap below which divided differences switch to the derivative.
    fn degenerate_gap() -> Self;
    /// Largest anti-Hermitian correction accepted by constructors.
    fn hermitian_reject() -> Self;
    /// Eigenvalue cutoff for support / image tests.
    fn support_cutoff() -> Self;
    /// Gap tolerance used to collect the top eigenspace.
    fn top_gap() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f64 {
    fn jacobi_tol() -> Self {
        1e-14
    }
    fn degenerate_gap() -> Self {
        1e-12
    }
    fn hermitian_reject() -> Self {
        1e-9
    }
    fn support_cutoff() -> Self {
        1e-10
    }
    fn top_gap() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn jacobi_tol() -> Self {
        1e-6
    }
    fn degenerate_gap() -> Self {
        1e-4
    }
    fn hermitian_reject() -> Self {
        1e-4
    }
    fn support_cutoff() -> Self {
        1e-5
    }
    fn top_gap() -> Self {
        1e-4
    }
}
