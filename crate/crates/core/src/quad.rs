//! Contour quadrature: trapezoid rule on circles (spectrally accurate for
//! integrands analytic in an annulus) and adaptive composite 16-point
//! Gauss-Legendre along polyline paths.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const GL_ORDER: usize = 16;

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre_16() -> &'static [(f64, f64); GL_ORDER] {
    static TABLE: OnceLock<[(f64, f64); GL_ORDER]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = GL_ORDER;
        let mut table = [(0.0, 0.0); GL_ORDER];
        for (i, slot) in table.iter_mut().enumerate() {
            // Tricomi initial guess for the i-th positive-to-negative node.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_and_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_and_derivative(n, x);
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        table
    })
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Single-panel Gauss-Legendre integral of `f` along the straight segment
/// from `a` to `b`. Returns None if the integrand is unavailable at a node.
fn gl_segment<F>(f: &F, a: Complex64, b: Complex64) -> Option<Complex64>
where
    F: Fn(Complex64) -> Option<Complex64>,
{
    let mid = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, w) in gauss_legendre_16() {
        acc += f(mid + half * x)? * w;
    }
    Some(acc * half)
}

fn gl_segment_panels<F>(f: &F, a: Complex64, b: Complex64, panels: usize) -> Option<Complex64>
where
    F: Fn(Complex64) -> Option<Complex64>,
{
    let step = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let lo = a + step * k as f64;
        acc += gl_segment(f, lo, lo + step)?;
    }
    Some(acc)
}

/// Composite Gauss-Legendre integral of `f` along the polyline through
/// `vertices`. Each segment starts at `initial_panels` panels and is halved
/// until two successive refinements agree to `tol`, up to `max_halvings`.
pub fn integrate_polyline<F>(
    f: &F,
    vertices: &[Complex64],
    initial_panels: usize,
    tol: f64,
    max_halvings: usize,
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Option<Complex64>,
{
    assert!(vertices.len() >= 2, "path needs at least two vertices");
    let mut total = Complex64::new(0.0, 0.0);
    for (seg, pair) in vertices.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if (a - b).norm() == 0.0 {
            continue;
        }
        let mut panels = initial_panels.max(1);
        let mut prev = gl_segment_panels(f, a, b, panels)
            .ok_or_else(|| Error::Quadrature(format!("integrand unavailable on segment {seg}")))?;
        let mut converged = false;
        for _ in 0..max_halvings {
            panels *= 2;
            let next = gl_segment_panels(f, a, b, panels).ok_or_else(|| {
                Error::Quadrature(format!("integrand unavailable on segment {seg}"))
            })?;
            if (next - prev).norm() <= tol * next.norm().max(1.0) {
                prev = next;
                converged = true;
                break;
            }
            prev = next;
        }
        if !converged {
            return Err(Error::Quadrature(format!(
                "segment {seg} ({a} -> {b}) did not settle to {tol:.1e} within {max_halvings} halvings"
            )));
        }
        total += prev;
    }
    Ok(total)
}

/// Trapezoid-rule contour integral `(1/2 pi i) \oint f(z) dz` over the circle
/// of given center and radius with `nodes` equispaced nodes.
pub fn circle_cauchy_integral<F>(
    f: &F,
    center: Complex64,
    radius: f64,
    nodes: usize,
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Option<Complex64>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * (j as f64) / (nodes as f64);
        let dir = Complex64::new(theta.cos(), theta.sin());
        let z = center + radius * dir;
        let v = f(z).ok_or_else(|| {
            Error::Quadrature(format!("integrand unavailable at contour node {z}"))
        })?;
        acc += v * dir;
    }
    Ok(acc * (radius / nodes as f64))
}
