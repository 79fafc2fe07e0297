//! Newton maps of entire functions as a computational object.
//!
//! The Newton map of an entire function `f` is the iteration
//! `N(z) = z - f(z)/f'(z)`; its attracting fixed points are exactly the
//! roots of `f`. This crate evaluates such maps robustly (including the
//! rational `p * exp(q)` family and the transcendental `z * exp(exp(z))`),
//! classifies their fixed points, reconstructs `f` from `N` by contour
//! integration, rasterizes basins of attraction, detects channels on large
//! circles, and provides a numerical winding-number calculus for fixed-point
//! counting.

pub mod dynamics;
pub mod error;
pub mod fixedpoint;
pub mod function;
pub mod lefschetz;
pub mod poly;
pub mod quad;
pub mod rational;

pub use error::Error;
pub use function::{ComplexMap, EvalResult, EvalStatus, FunctionSpec, Window};
pub use num_complex::Complex64;

/// Convenience: relative magnitude used throughout for tolerances of the form
/// `tol * max(1, |z|)`.
pub(crate) fn rel_scale(z: Complex64) -> f64 {
    z.norm().max(1.0)
}
