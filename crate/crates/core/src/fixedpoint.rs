//! Fixed points of Newton maps: location, classification by multiplier,
//! contour-integral residues, and reconstruction of the underlying entire
//! function from the map alone.
//!
//! A root of multiplicity `m` is an attracting fixed point with multiplier
//! `(m-1)/m`; conversely a meromorphic map is a Newton map exactly when all
//! its finite fixed points carry such multipliers. The residue of
//! `1/(z - N(z))` at a fixed point recovers `m`, and
//! `exp(integral of dw/(w - N(w)))` recovers `f` up to one multiplicative
//! constant.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{ComplexMap, FunctionSpec};
use crate::poly::{cluster_roots, Poly};
use crate::quad::{circle_cauchy_integral, integrate_polyline};
use crate::rel_scale;

/// Cluster radius factor for multiplicity detection, scaled by
/// `max(1, |root|)`.
pub const CLUSTER_RADIUS: f64 = 1e-7;

/// Multiplier must match `(m-1)/m` within this to classify as a root.
pub const MULTIPLIER_TOL: f64 = 1e-6;

/// `N(x) = x` must hold within this (relative) before classification.
pub const FIXED_POINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointKind {
    /// Multiplier is `(m-1)/m` for a positive integer `m`: the fixed point is
    /// an attracting root of multiplicity `m`.
    AttractingRoot,
    /// The multiplier criterion fails: not a Newton-map fixed point.
    Violation,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub location: Complex64,
    pub multiplier: Complex64,
    pub multiplicity: u32,
    pub kind: FixedPointKind,
}

/// An integration path: `anchor`, then each waypoint in order; operations
/// append their target as the final vertex. `samples_per_segment` is the
/// initial Gauss-Legendre panel count per segment before adaptive halving.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathSpec {
    pub anchor: Complex64,
    #[serde(default)]
    pub waypoints: Vec<Complex64>,
    pub samples_per_segment: usize,
}

impl PathSpec {
    pub fn direct(anchor: Complex64) -> Self {
        PathSpec {
            anchor,
            waypoints: vec![],
            samples_per_segment: 1,
        }
    }

    pub fn vertices_to(&self, target: Complex64) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.waypoints.len() + 2);
        v.push(self.anchor);
        v.extend_from_slice(&self.waypoints);
        v.push(target);
        v
    }

    /// No segment of the paths to any target may pass within `min_dist` of a
    /// fixed point.
    pub fn check_clearance(
        &self,
        targets: &[Complex64],
        fixed_points: &[Complex64],
        min_dist: f64,
    ) -> Result<()> {
        for &target in targets {
            let verts = self.vertices_to(target);
            for seg in verts.windows(2) {
                for &fp in fixed_points {
                    if point_segment_distance(fp, seg[0], seg[1]) < min_dist {
                        return Err(Error::Quadrature(format!(
                            "path segment {} -> {} passes within {min_dist:.1e} of fixed point {fp}",
                            seg[0], seg[1]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// All roots of `f` with multiplicities. Fixed points of the Newton map in
/// the plane are exactly these.
///
/// Multiplicities come from clustering the raw simultaneous-iteration roots,
/// starting at `CLUSTER_RADIUS`. A multiplicity-m cluster is then polished by
/// Newton iteration on the (m-1)-th derivative, for which the root is simple,
/// and validated against the multiplier law: `N'` at the polished location
/// must be `(m-1)/m`. Expansion noise scatters an m-fold root over a radius
/// like `eps^(1/m)`, which outgrows the base radius for m >= 3, so on a
/// validation mismatch the radius escalates tenfold (up to 1e-3) and the
/// clustering repeats.
pub fn find_roots(spec: &FunctionSpec) -> Result<Vec<(Complex64, usize)>> {
    let p = spec
        .root_polynomial()
        .ok_or(Error::Unsupported("root enumeration"))?;
    if p.degree() == Some(0) {
        return Ok(vec![]);
    }
    let raw = p.roots().map_err(|e| match e {
        Error::RootFinding { iterations, .. } => Error::RootFinding {
            spec: spec.describe(),
            iterations,
        },
        other => other,
    })?;

    let mut radius = CLUSTER_RADIUS;
    let mut best = polish_clusters(p, cluster_roots(&raw, radius), radius);
    while !clusters_validate(spec, &best) && radius < 1e-3 {
        radius *= 10.0;
        best = polish_clusters(p, cluster_roots(&raw, radius), radius);
    }
    Ok(best)
}

fn polish_clusters(
    p: &Poly,
    mut clusters: Vec<(Complex64, usize)>,
    radius: f64,
) -> Vec<(Complex64, usize)> {
    for (z, m) in clusters.iter_mut() {
        // An m-fold root of p is a simple root of the (m-1)-th derivative.
        let mut g = p.clone();
        for _ in 1..*m {
            g = g.derivative();
        }
        let gd = g.derivative();
        let max_step = 10.0 * radius * rel_scale(*z);
        for _ in 0..4 {
            let gv = g.eval(*z);
            let dv = gd.eval(*z);
            if dv.norm() < 1e-300 {
                break;
            }
            let step = gv / dv;
            if !step.is_finite() || step.norm() > max_step {
                break;
            }
            *z -= step;
        }
    }
    clusters
}

/// Each cluster's multiplier must agree with its size under the law
/// `lambda = (m-1)/m`.
fn clusters_validate(spec: &FunctionSpec, clusters: &[(Complex64, usize)]) -> bool {
    clusters.iter().all(|&(z, m)| {
        let Some(lambda) = spec.newton_derivative(z).ok() else {
            return false;
        };
        let expected = (m as f64 - 1.0) / m as f64;
        (lambda - Complex64::new(expected, 0.0)).norm() <= MULTIPLIER_TOL
    })
}

/// Classify a fixed point of the Newton map by its multiplier.
pub fn classify_fixed_point(spec: &FunctionSpec, xi: Complex64) -> Result<FixedPointRecord> {
    let n = spec.newton(xi);
    let residual = match n.ok() {
        Some(v) => (v - xi).norm(),
        None => f64::INFINITY,
    };
    if residual > FIXED_POINT_TOL * rel_scale(xi) {
        return Err(Error::NotAFixedPoint(xi, residual));
    }
    let lambda = spec
        .newton_derivative(xi)
        .ok()
        .ok_or(Error::NotAFixedPoint(xi, residual))?;
    Ok(classify_multiplier(xi, lambda))
}

/// The multiplier criterion itself: `lambda = (m-1)/m` for the integer
/// `m = round(1/(1-lambda))`, with `|lambda| < 1`.
pub fn classify_multiplier(xi: Complex64, lambda: Complex64) -> FixedPointRecord {
    let one = Complex64::new(1.0, 0.0);
    let denom = one - lambda;
    // lambda numerically 1 would force m = infinity.
    if denom.norm() < 1e-9 {
        return FixedPointRecord {
            location: xi,
            multiplier: lambda,
            multiplicity: 1,
            kind: FixedPointKind::Violation,
        };
    }
    let m_est = (one / denom).re.round();
    if m_est < 1.0 || m_est > u32::MAX as f64 {
        return FixedPointRecord {
            location: xi,
            multiplier: lambda,
            multiplicity: 1,
            kind: FixedPointKind::Violation,
        };
    }
    let m = m_est as u32;
    let expected = (m_est - 1.0) / m_est;
    let kind = if lambda.norm() < 1.0
        && (lambda - Complex64::new(expected, 0.0)).norm() <= MULTIPLIER_TOL
    {
        FixedPointKind::AttractingRoot
    } else {
        FixedPointKind::Violation
    };
    FixedPointRecord {
        location: xi,
        multiplier: lambda,
        multiplicity: m,
        kind,
    }
}

/// `(1/2 pi i) \oint dz/(z - N(z))` over the circle of `radius` about `xi`,
/// by trapezoid quadrature with 2048 nodes plus a 4096-node check. For a
/// genuine Newton map the result is the multiplicity of the enclosed root.
pub fn residue_at_fixed_point(
    spec: &FunctionSpec,
    xi: Complex64,
    radius: f64,
) -> Result<Complex64> {
    // The contour must isolate xi: no other fixed point inside, no pole of N
    // on the circle itself. Enumerable for the rational variants.
    if spec.root_polynomial().is_some() {
        for (root, _) in find_roots(spec)? {
            let d = (root - xi).norm();
            if d > FIXED_POINT_TOL * rel_scale(xi) && d < radius {
                return Err(Error::Quadrature(format!(
                    "contour of radius {radius} about {xi} encloses another fixed point at {root}; \
                     use a smaller radius"
                )));
            }
        }
        for (pole, _) in spec.newton_poles()? {
            if ((pole - xi).norm() - radius).abs() <= 1e-9 * radius.max(1.0) {
                return Err(Error::Quadrature(format!(
                    "contour of radius {radius} about {xi} passes through the pole at {pole}; \
                     use a smaller radius"
                )));
            }
        }
    }
    let integrand = |z: Complex64| {
        let n = spec.newton(z).ok()?;
        let d = z - n;
        (d.norm() > 0.0).then(|| 1.0 / d)
    };
    let coarse = circle_cauchy_integral(&integrand, xi, radius, 2048).map_err(augment_radius)?;
    let fine = circle_cauchy_integral(&integrand, xi, radius, 4096).map_err(augment_radius)?;
    if (fine - coarse).norm() > 1e-8 * fine.norm().max(1.0) {
        return Err(Error::Quadrature(format!(
            "contour refinement disagrees ({coarse} vs {fine}); a pole or second fixed point is \
             probably close -- try a smaller radius"
        )));
    }
    Ok(fine)
}

fn augment_radius(e: Error) -> Error {
    match e {
        Error::Quadrature(msg) => Error::Quadrature(format!("{msg}; try a smaller contour radius")),
        other => other,
    }
}

/// Reconstruct the entire function from its Newton map: for each target `z`
/// returns `exp(integral from anchor to z of dw/(w - N(w)))`, i.e. `f(z)`
/// normalized to value 1 at the anchor (one global multiplicative constant is
/// inherent). Only the finished integral is exponentiated, never pointwise
/// logarithms of `f`, so no branch-cut tracking is needed.
pub fn reconstruct_entire_function(
    newton: &dyn ComplexMap,
    path: &PathSpec,
    targets: &[Complex64],
) -> Result<Vec<Complex64>> {
    targets
        .iter()
        .map(|&target| Ok(reconstruction_integral(newton, path, target)?.exp()))
        .collect()
}

/// The raw log-integral behind `reconstruct_entire_function`, exposed for
/// path-dependence analysis: two paths differ by `2 pi i` times the total
/// multiplicity enclosed between them.
pub fn reconstruction_integral(
    newton: &dyn ComplexMap,
    path: &PathSpec,
    target: Complex64,
) -> Result<Complex64> {
    let integrand = |z: Complex64| {
        let n = newton.eval(z).ok()?;
        let d = z - n;
        (d.norm() > 0.0).then(|| 1.0 / d)
    };
    integrate_polyline(
        &integrand,
        &path.vertices_to(target),
        path.samples_per_segment,
        1e-9,
        12,
    )
}

/// Expand `a * prod (z - a_j)^{m_j}` into a polynomial spec.
pub fn head_polynomial(points: &[(Complex64, usize)], a: Complex64) -> Result<FunctionSpec> {
    if a.norm() == 0.0 {
        return Err(Error::InvalidSpec(
            "leading constant must be nonzero".into(),
        ));
    }
    for (i, &(zi, _)) in points.iter().enumerate() {
        for &(zj, _) in &points[i + 1..] {
            if (zi - zj).norm() <= 1e-9 {
                return Err(Error::InvalidSpec(format!(
                    "duplicate root {zi}; merge multiplicities instead"
                )));
            }
        }
    }
    let poly = Poly::from_roots(points, a);
    FunctionSpec::polynomial(poly.coeffs().to_vec())
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub records: Vec<FixedPointRecord>,
    /// True when every candidate classifies as an attracting root.
    pub all_attracting_roots: bool,
}

/// Check the Newton-map criterion on candidate fixed points of an arbitrary
/// map: every multiplier must be `(m-1)/m`. Violations are data, not errors.
pub fn verify_newton_criterion(
    map: &dyn ComplexMap,
    candidates: &[Complex64],
) -> Result<CriterionReport> {
    let mut records = Vec::with_capacity(candidates.len());
    for &xi in candidates {
        let v = map.eval(xi);
        let residual = match v.ok() {
            Some(val) => (val - xi).norm(),
            None => f64::INFINITY,
        };
        if residual > FIXED_POINT_TOL * rel_scale(xi) {
            return Err(Error::NotAFixedPoint(xi, residual));
        }
        let lambda = map
            .derivative(xi)
            .ok()
            .ok_or(Error::NotAFixedPoint(xi, residual))?;
        records.push(classify_multiplier(xi, lambda));
    }
    let all = records
        .iter()
        .all(|r| r.kind == FixedPointKind::AttractingRoot);
    Ok(CriterionReport {
        records,
        all_attracting_roots: all,
    })
}
