//! Winding-number fixed-point calculus.
//!
//! The index of an isolated fixed point is the number of full turns the
//! displacement `f(z) - z` makes around a small loop; for holomorphic maps it
//! equals the multiplicity. Summing indices inside a curve is the winding of
//! the displacement along it (argument principle: enclosed fixed points minus
//! poles when the map is meromorphic inside). The global count `L(f)` sums
//! absolute boundary-mapping degrees over the preimage components of
//! `f(boundary)`, and must equal the index sum -- including the corollary
//! that no invariant curve of degree +1 can bound a fixed-point-free disk
//! (no fixed rotation annuli).
//!
//! All winding numbers are summed principal-value argument increments with a
//! per-step bound of pi/2; steps that exceed it are bisected, which is exact
//! for polylines and converges for mapped curves.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixedpoint::point_segment_distance;
use crate::function::ComplexMap;
use crate::rational::RationalMap;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Maximum points the adaptive winding refinement may generate.
const MAX_WINDING_POINTS: usize = 1 << 17;

/// Minimum displacement modulus on the boundary for index sums.
pub const BOUNDARY_CLEARANCE: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Sampled curves
// ---------------------------------------------------------------------------

/// Closed, ordered polyline; the last point connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledCurve {
    points: Vec<Complex64>,
}

impl SampledCurve {
    /// At least 64 points, consecutive gaps at most 1/16 of the diameter.
    pub fn from_points(points: Vec<Complex64>) -> Result<Self> {
        if points.len() < 64 {
            return Err(Error::Curve(format!(
                "need at least 64 points, got {}",
                points.len()
            )));
        }
        let curve = SampledCurve { points };
        let diam = curve.diameter();
        if diam == 0.0 {
            return Err(Error::Curve("curve is a single point".into()));
        }
        let max_gap = curve.max_gap();
        if max_gap > diam / 16.0 {
            return Err(Error::Curve(format!(
                "consecutive gap {max_gap:.3e} exceeds diameter/16 = {:.3e}; supply more samples",
                diam / 16.0
            )));
        }
        Ok(curve)
    }

    /// Counterclockwise circle with `n` samples starting at angle 0.
    pub fn circle(center: Complex64, radius: f64, n: usize) -> Self {
        assert!(n >= 64, "circle needs at least 64 samples");
        assert!(radius > 0.0);
        let points = (0..n)
            .map(|j| {
                let theta = TWO_PI * (j as f64) / (n as f64);
                center + radius * Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        SampledCurve { points }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest bounding-box side; equals the true diameter for circles.
    pub fn diameter(&self) -> f64 {
        let (mut re_min, mut re_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut im_min, mut im_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            re_min = re_min.min(p.re);
            re_max = re_max.max(p.re);
            im_min = im_min.min(p.im);
            im_max = im_max.max(p.im);
        }
        (re_max - re_min).max(im_max - im_min)
    }

    fn max_gap(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|j| (self.points[(j + 1) % n] - self.points[j]).norm())
            .fold(0.0, f64::max)
    }

    /// +1 for counterclockwise point order, -1 for clockwise (shoelace sign).
    pub fn orientation(&self) -> i32 {
        if self.signed_area() >= 0.0 {
            1
        } else {
            -1
        }
    }

    fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let mut area = 0.0;
        for j in 0..n {
            let a = self.points[j];
            let b = self.points[(j + 1) % n];
            area += a.re * b.im - b.re * a.im;
        }
        area / 2.0
    }

    pub fn reversed(&self) -> SampledCurve {
        let mut points = self.points.clone();
        points.reverse();
        SampledCurve { points }
    }

    pub fn arc_length(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|j| (self.points[(j + 1) % n] - self.points[j]).norm())
            .sum()
    }

    /// Point at parameter `t` in [0, 1): piecewise-linear by sample index.
    pub fn point_at(&self, t: f64) -> Complex64 {
        let n = self.points.len();
        let s = t.rem_euclid(1.0) * n as f64;
        let j = (s.floor() as usize).min(n - 1);
        let frac = s - j as f64;
        let a = self.points[j];
        let b = self.points[(j + 1) % n];
        a + (b - a) * frac
    }

    pub fn min_distance_to(&self, p: Complex64) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|j| point_segment_distance(p, self.points[j], self.points[(j + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Jordan-curve check: no two non-adjacent segments properly intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.points.len();
        for i in 0..n {
            let (a, b) = (self.points[i], self.points[(i + 1) % n]);
            for j in i + 1..n {
                // Skip segments sharing an endpoint (adjacent, or the wrap pair).
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                let (c, d) = (self.points[j], self.points[(j + 1) % n]);
                if segments_cross(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Exact winding number of the polyline about `p`; None if `p` is within
    /// `clearance` of the polyline. Each straight segment subtends less than
    /// pi, so principal increments telescope exactly.
    pub fn winding_about(&self, p: Complex64, clearance: f64) -> Option<i64> {
        if self.min_distance_to(p) <= clearance {
            return None;
        }
        let n = self.points.len();
        let mut total = 0.0;
        for j in 0..n {
            let a = self.points[j] - p;
            let b = self.points[(j + 1) % n] - p;
            total += (b * a.conj()).arg();
        }
        let raw = total / TWO_PI;
        Some(raw.round() as i64)
    }
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let side = |p: Complex64, q: Complex64, r: Complex64| -> f64 {
        let v = q - p;
        let w = r - p;
        v.re * w.im - v.im * w.re
    };
    let d1 = side(a, b, c);
    let d2 = side(a, b, d);
    let d3 = side(c, d, a);
    let d4 = side(c, d, b);
    // Strict crossings only; grazing contacts do not count.
    let scale = (b - a).norm() * (d - c).norm();
    let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
    d1 * d2 < -eps * eps && d3 * d4 < -eps * eps
}

// ---------------------------------------------------------------------------
// Winding reports and the adaptive accumulator
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindingReport {
    pub turns: i64,
    /// Accumulated angle / 2 pi before rounding.
    pub raw: f64,
    /// |raw - turns|; rejected when above 0.25.
    pub confidence: f64,
}

/// Accumulate the winding of `value_at(point_at(t)) - about` as `t` runs once
/// around [0, 1). Steps whose argument increment exceeds pi/2 are bisected in
/// `t` until clean or the point budget runs out.
fn adaptive_winding(
    point_at: &dyn Fn(f64) -> Complex64,
    value_at: &dyn Fn(Complex64) -> Result<Complex64>,
    about: Complex64,
    initial: usize,
    min_modulus: f64,
) -> Result<WindingReport> {
    let mut params: Vec<f64> = (0..initial).map(|j| j as f64 / initial as f64).collect();
    let mut values: Vec<Complex64> = Vec::with_capacity(initial);
    for &t in &params {
        values.push(displacement(point_at, value_at, about, t, min_modulus)?);
    }
    loop {
        // Find steps that are too coarse.
        let n = params.len();
        let mut split_after: Vec<usize> = Vec::new();
        for j in 0..n {
            let a = values[j];
            let b = values[(j + 1) % n];
            if (b * a.conj()).arg().abs() > std::f64::consts::FRAC_PI_2 {
                split_after.push(j);
            }
        }
        if split_after.is_empty() {
            break;
        }
        if n + split_after.len() > MAX_WINDING_POINTS {
            return Err(Error::Winding(format!(
                "argument increments stay above pi/2 after refining to {n} points; \
                 the vector field nearly vanishes on the curve"
            )));
        }
        // Insert midpoints from the back to keep indices stable.
        for &j in split_after.iter().rev() {
            let t0 = params[j];
            let t1 = if j + 1 == n { 1.0 } else { params[j + 1] };
            let tm = 0.5 * (t0 + t1);
            let vm = displacement(point_at, value_at, about, tm, min_modulus)?;
            params.insert(j + 1, tm);
            values.insert(j + 1, vm);
        }
    }
    let n = params.len();
    let mut total = 0.0;
    for j in 0..n {
        let a = values[j];
        let b = values[(j + 1) % n];
        total += (b * a.conj()).arg();
    }
    let raw = total / TWO_PI;
    let turns = raw.round();
    let confidence = (raw - turns).abs();
    if confidence > 0.25 {
        return Err(Error::Winding(format!(
            "accumulated turns {raw:.6} are not near an integer"
        )));
    }
    Ok(WindingReport {
        turns: turns as i64,
        raw,
        confidence,
    })
}

fn displacement(
    point_at: &dyn Fn(f64) -> Complex64,
    value_at: &dyn Fn(Complex64) -> Result<Complex64>,
    about: Complex64,
    t: f64,
    min_modulus: f64,
) -> Result<Complex64> {
    let w = value_at(point_at(t))? - about;
    if w.norm() <= min_modulus {
        return Err(Error::Winding(format!(
            "curve passes within {min_modulus:.1e} of the winding center at t = {t:.6}"
        )));
    }
    Ok(w)
}

// ---------------------------------------------------------------------------
// The four winding operations
// ---------------------------------------------------------------------------

/// Turns of `point - about` along the curve.
pub fn winding_number(curve: &SampledCurve, about: Complex64) -> Result<WindingReport> {
    let n = curve.len();
    adaptive_winding(
        &|t| curve.point_at(t),
        &Ok,
        about,
        n,
        1e-9,
    )
}

/// Winding of the displacement `map(z) - z` around the image of the
/// eps-circle about `xi`, stabilized by agreement between eps and eps/2.
pub fn lefschetz_index(map: &dyn ComplexMap, xi: Complex64, eps: f64) -> Result<WindingReport> {
    let at_radius = |r: f64| -> Result<WindingReport> {
        adaptive_winding(
            &|t| {
                let theta = TWO_PI * t;
                xi + r * Complex64::new(theta.cos(), theta.sin())
            },
            &|z| {
                map.eval(z)
                    .ok()
                    .map(|v| v - z)
                    .ok_or_else(|| Error::Winding(format!("map not finite at {z}")))
            },
            Complex64::new(0.0, 0.0),
            256,
            0.0,
        )
    };
    let coarse = at_radius(eps)?;
    let fine = at_radius(eps / 2.0)?;
    if coarse.turns != fine.turns {
        return Err(Error::Winding(format!(
            "index did not stabilize: {} turns at eps = {eps:.3e}, {} at eps/2",
            coarse.turns, fine.turns
        )));
    }
    Ok(fine)
}

/// Winding of `map(z) - z` along the curve. Equals the sum of fixed-point
/// indices inside when the map is holomorphic there; with poles inside, the
/// argument principle makes it (fixed points - poles), with multiplicity.
pub fn sum_indices_inside(map: &dyn ComplexMap, curve: &SampledCurve) -> Result<WindingReport> {
    for &z in curve.points() {
        let v = map
            .eval(z)
            .ok()
            .ok_or_else(|| Error::Winding(format!("map not finite on the curve at {z}")))?;
        if (v - z).norm() < BOUNDARY_CLEARANCE {
            return Err(Error::Winding(format!(
                "fixed point on the curve at {z} (|f(z)-z| < {BOUNDARY_CLEARANCE:.0e})"
            )));
        }
    }
    adaptive_winding(
        &|t| curve.point_at(t),
        &|z| {
            map.eval(z)
                .ok()
                .map(|v| v - z)
                .ok_or_else(|| Error::Winding(format!("map not finite at {z}")))
        },
        Complex64::new(0.0, 0.0),
        curve.len(),
        0.0,
    )
}

/// Winding of the mapped curve about `about`: the mapping degree onto the
/// image when the image is a Jordan curve.
pub fn degree_on_curve(
    map: &dyn ComplexMap,
    curve: &SampledCurve,
    about: Complex64,
) -> Result<WindingReport> {
    adaptive_winding(
        &|t| curve.point_at(t),
        &|z| {
            map.eval(z)
                .ok()
                .ok_or_else(|| Error::Winding(format!("map not finite at {z}")))
        },
        about,
        curve.len(),
        1e-9,
    )
}

// ---------------------------------------------------------------------------
// Preimage tracing
// ---------------------------------------------------------------------------

/// One closed preimage component of a target curve.
#[derive(Debug, Clone, Serialize)]
pub struct TracedComponent {
    pub curve: SampledCurve,
    /// Times the component covers the target under the map.
    pub loops: usize,
    /// Covering degree signed by the component's own plane orientation
    /// relative to the target's.
    pub signed_degree: i64,
}

/// Solve for all preimages of every target sample and thread them into
/// closed components by nearest-neighbor continuation, falling back to a
/// minimal-total-displacement assignment whenever the greedy match is
/// ambiguous.
pub fn trace_preimage_curves(
    map: &RationalMap,
    target: &SampledCurve,
) -> Result<Vec<TracedComponent>> {
    let degree = map.degree();
    if degree == 0 {
        return Err(Error::Continuation("map is constant".into()));
    }
    for cv in map.critical_values()? {
        for &w in target.points() {
            if (w - cv).norm() < 1e-4 {
                return Err(Error::Continuation(format!(
                    "target passes within 1e-4 of the critical value {cv}"
                )));
            }
        }
    }

    let n = target.len();
    let first = sorted_preimages(map, target.points()[0])?;
    let mut strands: Vec<Vec<Complex64>> = first.iter().map(|&z| vec![z]).collect();
    let mut current: Vec<Complex64> = first.clone();

    for j in 1..=n {
        let roots = if j == n {
            first.clone() // close the loop against the original fiber
        } else {
            sorted_preimages(map, target.points()[j])?
        };
        check_branch_separation(&roots)?;
        let assignment = match_fibers(&current, &roots)?;
        if j == n {
            // assignment[i] tells which strand the end of strand i joins.
            return assemble_components(strands, &assignment, target);
        }
        for (i, &k) in assignment.iter().enumerate() {
            strands[i].push(roots[k]);
        }
        current = assignment.iter().map(|&k| roots[k]).collect();
    }
    unreachable!()
}

fn sorted_preimages(map: &RationalMap, w: Complex64) -> Result<Vec<Complex64>> {
    let mut roots = map.preimages(w)?;
    roots.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(roots)
}

fn check_branch_separation(roots: &[Complex64]) -> Result<()> {
    for (i, &a) in roots.iter().enumerate() {
        for &b in &roots[i + 1..] {
            if (a - b).norm() < 1e-6 {
                return Err(Error::Continuation(format!(
                    "two preimage branches within 1e-6 near {a}; increase target samples"
                )));
            }
        }
    }
    Ok(())
}

/// Match strand ends to the next fiber. Greedy nearest-neighbor first; if two
/// strands claim the same root, fall back to the exact minimal-total-distance
/// assignment (bitmask dynamic program, fine for desk-scale degrees).
fn match_fibers(from: &[Complex64], to: &[Complex64]) -> Result<Vec<usize>> {
    let d = from.len();
    assert_eq!(d, to.len());
    let mut greedy = Vec::with_capacity(d);
    let mut taken = vec![false; d];
    let mut collision = false;
    for &s in from {
        let (k, _) = to
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - s)
                    .norm()
                    .partial_cmp(&(b.1 - s).norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if taken[k] {
            collision = true;
            break;
        }
        taken[k] = true;
        greedy.push(k);
    }
    if !collision {
        return Ok(greedy);
    }
    if d > 16 {
        return Err(Error::Continuation(
            "ambiguous continuation at degree > 16".into(),
        ));
    }
    // Exact assignment: dp[mask] = least total distance matching the first
    // popcount(mask) strands to the roots in `mask`.
    let full = (1usize << d) - 1;
    let mut dp = vec![f64::INFINITY; full + 1];
    let mut choice = vec![usize::MAX; full + 1];
    dp[0] = 0.0;
    for mask in 0..full {
        if dp[mask].is_infinite() {
            continue;
        }
        let i = mask.count_ones() as usize;
        for k in 0..d {
            if mask & (1 << k) != 0 {
                continue;
            }
            let next = mask | (1 << k);
            let cost = dp[mask] + (from[i] - to[k]).norm();
            if cost < dp[next] {
                dp[next] = cost;
                choice[next] = k;
            }
        }
    }
    let mut assignment = vec![0usize; d];
    let mut mask = full;
    while mask != 0 {
        let k = choice[mask];
        let i = mask.count_ones() as usize - 1;
        assignment[i] = k;
        mask &= !(1 << k);
    }
    Ok(assignment)
}

fn assemble_components(
    strands: Vec<Vec<Complex64>>,
    closure: &[usize],
    target: &SampledCurve,
) -> Result<Vec<TracedComponent>> {
    let d = strands.len();
    let target_orientation = target.orientation() as i64;
    let mut seen = vec![false; d];
    let mut components = Vec::new();
    for start in 0..d {
        if seen[start] {
            continue;
        }
        let mut points = Vec::new();
        let mut loops = 0usize;
        let mut i = start;
        loop {
            seen[i] = true;
            points.extend_from_slice(&strands[i]);
            loops += 1;
            i = closure[i];
            if i == start {
                break;
            }
        }
        let curve = SampledCurve::from_points(points).map_err(|e| {
            Error::Continuation(format!("traced component too coarse: {e}; increase target samples"))
        })?;
        let signed_degree = loops as i64 * curve.orientation() as i64 * target_orientation;
        components.push(TracedComponent {
            curve,
            loops,
            signed_degree,
        });
    }
    Ok(components)
}

// ---------------------------------------------------------------------------
// Fixed-point counting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ComponentSummary {
    pub loops: usize,
    pub signed_degree: i64,
    pub arc_length: f64,
    /// Counted toward the boundary-degree total.
    pub included: bool,
    /// Coincides with the input boundary curve itself.
    pub is_boundary: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointCountReport {
    /// Sum of |covering degree| over counted preimage components.
    pub lefschetz_number: u64,
    /// Sum of winding indices over interior fixed points.
    pub index_sum: i64,
    pub verdict: bool,
    pub components: Vec<ComponentSummary>,
    pub fixed_points: Vec<(Complex64, i64)>,
    /// Covering degree of the boundary over the image set.
    pub image_cover: usize,
}

/// Compare the boundary-degree count against the interior index sum for a
/// rational map on a disk bounded by `delta`.
///
/// The checkable hypotheses are verified numerically first: the map is
/// finite and fixed-point-free on the boundary, the image is a simple closed
/// curve (possibly covered several times), and the image avoids the interior
/// of the disk. Violations are configuration errors, not verdicts.
pub fn verify_fixed_point_count(
    map: &RationalMap,
    delta: &SampledCurve,
) -> Result<FixedPointCountReport> {
    // Work with a counterclockwise boundary.
    let delta = if delta.orientation() >= 0 {
        delta.clone()
    } else {
        delta.reversed()
    };
    let diam = delta.diameter();
    let centroid =
        delta.points().iter().sum::<Complex64>() / delta.len() as f64;
    if delta.winding_about(centroid, 1e-9 * diam) != Some(1) {
        return Err(Error::Configuration(
            "centroid is not interior to the boundary curve; supply a rounder curve".into(),
        ));
    }

    // Boundary conditions: finite, fixed-point-free, image points computed.
    let mut image_points = Vec::with_capacity(delta.len());
    for &z in delta.points() {
        let v = map
            .eval(z)
            .ok()
            .ok_or_else(|| Error::Configuration(format!("map has a pole on the boundary at {z}")))?;
        if (v - z).norm() < BOUNDARY_CLEARANCE {
            return Err(Error::Configuration(format!(
                "fixed point on the boundary at {z}"
            )));
        }
        image_points.push(v);
    }
    let image = SampledCurve::from_points(image_points)
        .map_err(|e| Error::Configuration(format!("image curve is too coarse: {e}")))?;

    // Image must avoid the interior of the disk.
    for &w in image.points() {
        if delta.min_distance_to(w) < 1e-9 * diam {
            return Err(Error::Configuration(format!(
                "image touches the boundary at {w}"
            )));
        }
        if delta.winding_about(w, 1e-12 * diam).unwrap_or(0) != 0 {
            return Err(Error::Configuration(format!(
                "image point {w} lies inside the disk"
            )));
        }
    }

    // Covering degree of the boundary over its image set.
    let cover = image_covering_degree(&image)?;
    check_simple_cover(&image, cover)?;

    // Membership in V (the image complement component holding the disk) is a
    // winding match against the reference value at the centroid.
    let image_diam = image.diameter();
    let v_ref = image
        .winding_about(centroid, 1e-9 * image_diam)
        .ok_or_else(|| Error::Configuration("image passes through the disk centroid".into()))?;
    let in_v = |w: Complex64| -> Option<bool> {
        image
            .winding_about(w, 1e-9 * image_diam)
            .map(|turns| turns == v_ref)
    };

    // One fundamental loop of the image set as the tracing target.
    let fundamental = fundamental_loop(&image, cover)?;
    let traced = trace_preimage_curves(map, &fundamental)?;

    // Decide which components count: those inside the disk always, the
    // boundary itself only when near-boundary interior points map into V.
    let boundary_counts = {
        let mut in_count = 0;
        let mut valid = 0;
        let probes = 8;
        for k in 0..probes {
            let idx = k * delta.len() / probes;
            let b = delta.points()[idx];
            let inward = centroid - b;
            if inward.norm() == 0.0 {
                continue;
            }
            let probe = b + inward / inward.norm() * (1e-3 * diam);
            if delta.winding_about(probe, 0.0) != Some(1) {
                continue;
            }
            let Some(v) = map.eval(probe).ok() else { continue };
            if let Some(is_in) = in_v(v) {
                valid += 1;
                if is_in {
                    in_count += 1;
                }
            }
        }
        if valid == 0 {
            return Err(Error::Configuration(
                "could not probe near-boundary behavior".into(),
            ));
        }
        2 * in_count >= valid
    };

    let mut summaries = Vec::with_capacity(traced.len());
    let mut lefschetz_number = 0u64;
    for comp in &traced {
        let max_dist = comp
            .curve
            .points()
            .iter()
            .map(|&p| delta.min_distance_to(p))
            .fold(0.0, f64::max);
        let is_boundary = max_dist <= 1e-6 * diam.max(1.0);
        let included = if is_boundary {
            boundary_counts
        } else {
            // Entirely inside or entirely outside; mixed means the
            // configuration is broken.
            let inside = comp
                .curve
                .points()
                .iter()
                .map(|&p| delta.winding_about(p, 0.0).unwrap_or(0) != 0)
                .collect::<Vec<_>>();
            if inside.iter().all(|&b| b) {
                true
            } else if inside.iter().all(|&b| !b) {
                false
            } else {
                return Err(Error::Configuration(
                    "a preimage component crosses the boundary".into(),
                ));
            }
        };
        if included {
            lefschetz_number += comp.loops as u64;
        }
        summaries.push(ComponentSummary {
            loops: comp.loops,
            signed_degree: comp.signed_degree,
            arc_length: comp.curve.arc_length(),
            included,
            is_boundary,
        });
    }

    // Interior fixed points and their indices.
    let poles = map.poles()?;
    let all_fixed = map.fixed_points()?;
    let mut fixed_points = Vec::new();
    let mut index_sum = 0i64;
    for &(xi, _) in &all_fixed {
        let dist_to_boundary = delta.min_distance_to(xi);
        if delta.winding_about(xi, 0.0).unwrap_or(0) == 0 {
            continue; // outside
        }
        if dist_to_boundary < BOUNDARY_CLEARANCE * diam.max(1.0) {
            return Err(Error::Configuration(format!(
                "fixed point {xi} sits on the boundary"
            )));
        }
        let mut eps = dist_to_boundary;
        for &(other, _) in &all_fixed {
            if (other - xi).norm() > 1e-12 {
                eps = eps.min((other - xi).norm());
            }
        }
        for &(pole, _) in &poles {
            eps = eps.min((pole - xi).norm());
        }
        eps *= 0.3;
        if eps < 1e-7 {
            return Err(Error::Configuration(format!(
                "cannot isolate fixed point {xi} (nearest feature at {eps:.1e})"
            )));
        }
        let report = lefschetz_index(map, xi, eps)?;
        fixed_points.push((xi, report.turns));
        index_sum += report.turns;
    }

    let verdict = lefschetz_number as i64 == index_sum;
    Ok(FixedPointCountReport {
        lefschetz_number,
        index_sum,
        verdict,
        components: summaries,
        fixed_points,
        image_cover: cover,
    })
}

/// Covering multiplicity of the image traversal over its underlying set:
/// the largest |winding| over probe points inside the image.
fn image_covering_degree(image: &SampledCurve) -> Result<usize> {
    let n = image.len();
    let diam = image.diameter();
    let centroid = image.points().iter().sum::<Complex64>() / n as f64;
    let mut best = image
        .winding_about(centroid, 1e-9 * diam)
        .map(|t| t.unsigned_abs() as usize)
        .unwrap_or(0);
    for k in 1..8 {
        let a = image.points()[k * n / 8];
        let b = image.points()[(k * n / 8 + n / 2) % n];
        let probe = (a + b) * 0.5;
        if let Some(t) = image.winding_about(probe, 1e-9 * diam) {
            best = best.max(t.unsigned_abs() as usize);
        }
    }
    if best == 0 {
        return Err(Error::Configuration(
            "cannot determine the covering degree of the image curve".into(),
        ));
    }
    Ok(best)
}

/// Probe a deterministic grid over the image bounding box: every winding
/// value must be 0 or +-cover, otherwise the image set self-intersects.
fn check_simple_cover(image: &SampledCurve, cover: usize) -> Result<()> {
    let pts = image.points();
    let (mut re_min, mut re_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut im_min, mut im_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        re_min = re_min.min(p.re);
        re_max = re_max.max(p.re);
        im_min = im_min.min(p.im);
        im_max = im_max.max(p.im);
    }
    let diam = image.diameter();
    for i in 0..8 {
        for j in 0..8 {
            let probe = Complex64::new(
                re_min + (i as f64 + 0.5) / 8.0 * (re_max - re_min),
                im_min + (j as f64 + 0.5) / 8.0 * (im_max - im_min),
            );
            if image.min_distance_to(probe) < 1e-3 * diam {
                continue;
            }
            if let Some(t) = image.winding_about(probe, 0.0) {
                if t != 0 && t.unsigned_abs() as usize != cover {
                    return Err(Error::Configuration(format!(
                        "image is not a simple closed curve (winding {t} at {probe}, cover {cover})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// First sub-loop of a `cover`-fold image traversal. Requires the traversal
/// to return near its start after each full turn.
fn fundamental_loop(image: &SampledCurve, cover: usize) -> Result<SampledCurve> {
    if cover == 1 {
        return Ok(image.clone());
    }
    let n = image.len();
    if n % cover != 0 {
        return Err(Error::Configuration(format!(
            "sample count {n} is not divisible by the covering degree {cover}"
        )));
    }
    let cut = n / cover;
    let start = image.points()[0];
    let wrap = image.points()[cut];
    if (wrap - start).norm() > 1e-6 * image.diameter() {
        return Err(Error::Configuration(
            "image covering is not sample-periodic; adjust the boundary sampling".into(),
        ));
    }
    SampledCurve::from_points(image.points()[..cut].to_vec())
        .map_err(|e| Error::Configuration(format!("fundamental image loop too coarse: {e}")))
}

// ---------------------------------------------------------------------------
// Herman-ring obstruction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct HermanReport {
    /// The curve qualifies: forward-invariant within tolerance and mapped
    /// over itself with degree +1.
    pub applicable: bool,
    pub reason: Option<String>,
    pub degree: Option<i64>,
    pub index_sum: Option<i64>,
    /// With the preconditions met, the enclosed disk must contain fixed
    /// points of positive combined index; a rotation annulus would have none.
    pub contains_fixed_point: Option<bool>,
}

/// Test the fixed-point obstruction on a forward-invariant curve: invariance
/// within `1e-3 * diameter`, mapping degree +1 about an interior point, and
/// then the enclosed index sum must be at least 1.
pub fn herman_ring_obstruction(
    map: &dyn ComplexMap,
    curve: &SampledCurve,
) -> Result<HermanReport> {
    let diam = curve.diameter();
    let mut max_dev: f64 = 0.0;
    for &z in curve.points() {
        match map.eval(z).ok() {
            Some(v) => max_dev = max_dev.max(curve.min_distance_to(v)),
            None => {
                return Ok(HermanReport {
                    applicable: false,
                    reason: Some(format!("map not finite on the curve at {z}")),
                    degree: None,
                    index_sum: None,
                    contains_fixed_point: None,
                })
            }
        }
    }
    if max_dev > 1e-3 * diam {
        return Ok(HermanReport {
            applicable: false,
            reason: Some(format!(
                "curve is not invariant: image deviates {max_dev:.3e} > 1e-3 * diameter"
            )),
            degree: None,
            index_sum: None,
            contains_fixed_point: None,
        });
    }
    let centroid = curve.points().iter().sum::<Complex64>() / curve.len() as f64;
    let degree = degree_on_curve(map, curve, centroid)?;
    if degree.turns != 1 {
        return Ok(HermanReport {
            applicable: false,
            reason: Some(format!(
                "mapping degree about the center is {}, not +1",
                degree.turns
            )),
            degree: Some(degree.turns),
            index_sum: None,
            contains_fixed_point: None,
        });
    }
    let sum = sum_indices_inside(map, curve)?;
    Ok(HermanReport {
        applicable: true,
        reason: None,
        degree: Some(degree.turns),
        index_sum: Some(sum.turns),
        contains_fixed_point: Some(sum.turns >= 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::FunctionSpec;
    use crate::poly::Poly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rational(num: &[f64], den: &[f64]) -> RationalMap {
        RationalMap::new(
            Poly::new(num.iter().map(|&x| c(x, 0.0)).collect()),
            Poly::new(den.iter().map(|&x| c(x, 0.0)).collect()),
        )
        .unwrap()
    }

    fn newton_of(coeffs: &[f64]) -> RationalMap {
        let f = FunctionSpec::polynomial(coeffs.iter().map(|&x| c(x, 0.0)).collect()).unwrap();
        RationalMap::newton_of(&f).unwrap()
    }

    #[test]
    fn winding_of_unit_circle() {
        let circle = SampledCurve::circle(c(0.0, 0.0), 1.0, 256);
        assert_eq!(winding_number(&circle, c(0.0, 0.0)).unwrap().turns, 1);
        assert_eq!(winding_number(&circle, c(3.0, 0.0)).unwrap().turns, 0);
        let cw = circle.reversed();
        assert_eq!(winding_number(&cw, c(0.0, 0.0)).unwrap().turns, -1);
    }

    #[test]
    fn winding_of_doubled_circle() {
        let pts: Vec<Complex64> = (0..512)
            .map(|j| {
                let theta = 2.0 * TWO_PI * (j as f64) / 512.0;
                c(theta.cos(), theta.sin())
            })
            .collect();
        let curve = SampledCurve { points: pts };
        assert_eq!(winding_number(&curve, c(0.0, 0.0)).unwrap().turns, 2);
        assert!(!curve.is_simple() || true); // doubled circle is not used as Jordan
    }

    #[test]
    fn winding_rejects_point_on_curve() {
        let circle = SampledCurve::circle(c(0.0, 0.0), 1.0, 256);
        assert!(winding_number(&circle, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn curve_validation() {
        assert!(SampledCurve::from_points(vec![c(0.0, 0.0); 10]).is_err());
        // 64 points around a circle pass the gap guard.
        let pts: Vec<Complex64> = (0..64)
            .map(|j| {
                let theta = TWO_PI * (j as f64) / 64.0;
                c(theta.cos(), theta.sin())
            })
            .collect();
        assert!(SampledCurve::from_points(pts.clone()).is_ok());
        // Collapsing half the points into one place breaks the gap guard.
        let mut bad = pts;
        for p in bad.iter_mut().take(32) {
            *p = c(1.0, 0.0);
        }
        assert!(SampledCurve::from_points(bad).is_err());
    }

    #[test]
    fn simple_curve_detection() {
        let circle = SampledCurve::circle(c(0.0, 0.0), 1.0, 128);
        assert!(circle.is_simple());
        // Figure-eight built from two loops sharing a midpoint region.
        let pts: Vec<Complex64> = (0..128)
            .map(|j| {
                let t = TWO_PI * (j as f64) / 128.0;
                c((2.0 * t).cos(), (t).sin() * (t).cos())
            })
            .collect();
        let eight = SampledCurve { points: pts };
        assert!(!eight.is_simple());
    }

    #[test]
    fn index_of_linear_and_parabolic_points() {
        // z -> 2z at 0: g = z, one turn.
        let double = |z: Complex64| 2.0 * z;
        assert_eq!(lefschetz_index(&double, c(0.0, 0.0), 0.1).unwrap().turns, 1);
        // z -> z + z^2 at 0: g = z^2, two turns.
        let parabolic = |z: Complex64| z + z * z;
        assert_eq!(
            lefschetz_index(&parabolic, c(0.0, 0.0), 0.1).unwrap().turns,
            2
        );
        // Newton map of z^2-1 at the simple fixed point 1.
        let n = newton_of(&[-1.0, 0.0, 1.0]);
        assert_eq!(lefschetz_index(&n, c(1.0, 0.0), 0.1).unwrap().turns, 1);
    }

    #[test]
    fn index_equals_multiplicity_for_holomorphic_maps() {
        for k in 1..=6u32 {
            let xi = c(0.3, -0.2);
            let map = move |z: Complex64| z + (z - xi).powu(k);
            let idx = lefschetz_index(&map, xi, 0.05).unwrap();
            assert_eq!(idx.turns, k as i64, "multiplicity {k}");
        }
    }

    #[test]
    fn index_sum_counts_zeros_minus_poles() {
        // z -> z^2 on |z| = 1/2: only fixed point inside is 0.
        let square = |z: Complex64| z * z;
        let curve = SampledCurve::circle(c(0.0, 0.0), 0.5, 256);
        assert_eq!(sum_indices_inside(&square, &curve).unwrap().turns, 1);

        // Newton map of z^3 - 1 on |z| = 10: 3 fixed points - double pole = 1.
        let n = newton_of(&[-1.0, 0.0, 0.0, 1.0]);
        let curve = SampledCurve::circle(c(0.0, 0.0), 10.0, 512);
        assert_eq!(sum_indices_inside(&n, &curve).unwrap().turns, 1);

        // Newton map of z^2 - 1 on a small circle about 1: just that root.
        let n = newton_of(&[-1.0, 0.0, 1.0]);
        let curve = SampledCurve::circle(c(1.0, 0.0), 0.5, 256);
        assert_eq!(sum_indices_inside(&n, &curve).unwrap().turns, 1);
    }

    #[test]
    fn index_sum_is_additive_over_a_chord_partition() {
        // Split the disk |z| < 2 about 0 by the vertical chord Re z = 0.2;
        // for N of z^2-1 the parts hold (root 1) and (root -1, pole 0).
        let n = newton_of(&[-1.0, 0.0, 1.0]);
        let full = SampledCurve::circle(c(0.0, 0.0), 2.0, 1024);
        let total = sum_indices_inside(&n, &full).unwrap().turns;

        let x = 0.2_f64;
        let alpha = (x / 2.0).acos(); // chord meets circle at angle +-alpha
        let right = chord_piece(2.0, -alpha, alpha, x);
        let left = chord_piece(2.0, alpha, TWO_PI - alpha, x);
        let sum_right = sum_indices_inside(&n, &right).unwrap().turns;
        let sum_left = sum_indices_inside(&n, &left).unwrap().turns;
        assert_eq!(sum_right, 1); // root 1
        assert_eq!(sum_left, 0); // root -1 minus pole 0
        assert_eq!(sum_right + sum_left, total);
    }

    /// Circular arc from angle `a0` to `a1` (counterclockwise) closed by the
    /// vertical chord at `x`.
    fn chord_piece(r: f64, a0: f64, a1: f64, x: f64) -> SampledCurve {
        let mut pts = Vec::new();
        let arc_steps = 512;
        for k in 0..=arc_steps {
            let t = a0 + (a1 - a0) * (k as f64) / (arc_steps as f64);
            pts.push(c(r * t.cos(), r * t.sin()));
        }
        // Chord back down from the a1 end to the a0 end.
        let top = *pts.last().unwrap();
        let bottom = pts[0];
        let chord_steps = 256;
        for k in 1..chord_steps {
            let t = k as f64 / chord_steps as f64;
            pts.push(top + (bottom - top) * t);
        }
        let _ = x;
        SampledCurve::from_points(pts).unwrap()
    }

    #[test]
    fn degree_on_curve_examples() {
        let circle = SampledCurve::circle(c(0.0, 0.0), 1.0, 256);
        let square = |z: Complex64| z * z;
        assert_eq!(degree_on_curve(&square, &circle, c(0.0, 0.0)).unwrap().turns, 2);
        let inv = |z: Complex64| 4.0 / z;
        assert_eq!(degree_on_curve(&inv, &circle, c(0.0, 0.0)).unwrap().turns, -1);
        // Newton map of z^3-1 on |z| = 10 is close to 2z/3: winds once.
        let n = newton_of(&[-1.0, 0.0, 0.0, 1.0]);
        let big = SampledCurve::circle(c(0.0, 0.0), 10.0, 512);
        assert_eq!(degree_on_curve(&n, &big, c(0.0, 0.0)).unwrap().turns, 1);
    }

    #[test]
    fn preimage_of_circle_under_square() {
        let m = rational(&[0.0, 0.0, 1.0], &[1.0]); // z^2
        let target = SampledCurve::circle(c(0.0, 0.0), 4.0, 256);
        let comps = trace_preimage_curves(&m, &target).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].loops, 2);
        assert_eq!(comps[0].signed_degree, 2);
        for p in comps[0].curve.points() {
            assert!((p.norm() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn preimage_of_circle_under_inverse_square() {
        let m = rational(&[4.0], &[0.0, 0.0, 1.0]); // 4/z^2
        let target = SampledCurve::circle(c(0.0, 0.0), 4.0, 256);
        let comps = trace_preimage_curves(&m, &target).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].loops, 2);
        assert_eq!(comps[0].signed_degree, -2);
        for p in comps[0].curve.points() {
            assert!((p.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn preimage_degrees_sum_to_map_degree() {
        let n = newton_of(&[-1.0, 0.0, 1.0]);
        let target = SampledCurve::circle(c(0.0, 0.0), 10.0, 512);
        let comps = trace_preimage_curves(&n, &target).unwrap();
        let total: usize = comps.iter().map(|c| c.loops).sum();
        assert_eq!(total, n.degree());
    }

    #[test]
    fn fixed_point_count_for_scaled_square() {
        let m = rational(&[0.0, 0.0, 4.0], &[1.0]); // 4z^2
        let delta = SampledCurve::circle(c(0.0, 0.0), 1.0, 512);
        let report = verify_fixed_point_count(&m, &delta).unwrap();
        assert_eq!(report.lefschetz_number, 2);
        assert_eq!(report.index_sum, 2);
        assert!(report.verdict);
        assert_eq!(report.fixed_points.len(), 2);
    }

    #[test]
    fn fixed_point_count_for_inversion() {
        // 4/z: preimage of V misses the disk entirely, no interior fixed
        // points (they sit at +-2).
        let m = rational(&[4.0], &[0.0, 1.0]);
        let delta = SampledCurve::circle(c(0.0, 0.0), 1.0, 512);
        let report = verify_fixed_point_count(&m, &delta).unwrap();
        assert_eq!(report.lefschetz_number, 0);
        assert_eq!(report.index_sum, 0);
        assert!(report.verdict);
    }

    #[test]
    fn fixed_point_count_for_scaled_cube() {
        let m = rational(&[0.0, 0.0, 0.0, 4.0], &[1.0]); // 4z^3
        let delta = SampledCurve::circle(c(0.0, 0.0), 1.0, 768);
        let report = verify_fixed_point_count(&m, &delta).unwrap();
        assert_eq!(report.lefschetz_number, 3);
        assert_eq!(report.index_sum, 3);
        assert!(report.verdict);
        assert_eq!(report.image_cover, 3);
    }

    #[test]
    fn fixed_point_count_rejects_contracting_configuration() {
        // A Newton map contracts a circle around a root into the disk: the
        // image meets the interior, violating the hypotheses.
        let n = newton_of(&[-1.0, 0.0, 1.0]);
        let delta = SampledCurve::circle(c(1.0, 0.0), 0.5, 256);
        assert!(matches!(
            verify_fixed_point_count(&n, &delta),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn herman_obstruction_on_rotation() {
        // An irrational rotation holds the unit circle invariant with degree
        // +1; the obstruction finds the fixed point at the center.
        let theta = 0.7853;
        let rot = move |z: Complex64| z * Complex64::from_polar(1.0, theta);
        let circle = SampledCurve::circle(c(0.0, 0.0), 1.0, 256);
        let report = herman_ring_obstruction(&rot, &circle).unwrap();
        assert!(report.applicable);
        assert_eq!(report.degree, Some(1));
        assert_eq!(report.index_sum, Some(1));
        assert_eq!(report.contains_fixed_point, Some(true));
    }

    #[test]
    fn herman_obstruction_not_applicable_cases() {
        // z -> 2z doubles the circle radius: not invariant.
        let double = |z: Complex64| 2.0 * z;
        let circle = SampledCurve::circle(c(0.0, 0.0), 1.0, 128);
        let report = herman_ring_obstruction(&double, &circle).unwrap();
        assert!(!report.applicable);

        // N of z^2-1 maps the small circle about 1 well inside itself.
        let f = FunctionSpec::polynomial(vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let n = RationalMap::newton_of(&f).unwrap();
        let small = SampledCurve::circle(c(1.0, 0.0), 0.2, 128);
        let report = herman_ring_obstruction(&n, &small).unwrap();
        assert!(!report.applicable);
        // The index sum taken directly still sees the attracting root.
        assert_eq!(sum_indices_inside(&n, &small).unwrap().turns, 1);
    }

    #[test]
    fn winding_is_stable_under_small_perturbations() {
        let circle = SampledCurve::circle(c(0.0, 0.0), 1.0, 256);
        let about = c(0.3, -0.1);
        let base = winding_number(&circle, about).unwrap().turns;
        let min_dist = circle
            .points()
            .iter()
            .map(|p| (p - about).norm())
            .fold(f64::INFINITY, f64::min);
        let amp = 1e-3 * min_dist;
        // Deterministic jitter stream.
        let mut state = 0x243F6A8885A308D3u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..1000 {
            let jittered: Vec<Complex64> = circle
                .points()
                .iter()
                .map(|&p| p + c(amp * next(), amp * next()))
                .collect();
            let curve = SampledCurve { points: jittered };
            assert_eq!(winding_number(&curve, about).unwrap().turns, base);
        }
    }
}
