//! Orbit iteration and basin analysis for Newton maps.
//!
//! Iterating `N` from a starting point ends in one of four fates: capture by
//! a root, escape to infinity, a direct hit on a pole of `N`, or the budget
//! running out. Rasterizing those fates over a pixel grid reproduces the
//! basin pictures; classifying points of a large circle yields the channel
//! structure of polynomial Newton maps (a basin with k interior critical
//! points meets the circle in exactly k arcs), and two verification drivers
//! check the root-between-channels property and the linearization
//! `N(z) ~ (d-1)/d * z` near infinity.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixedpoint::find_roots;
use crate::function::{EvalStatus, FunctionSpec, Window};
use crate::poly::cluster_roots;
use crate::rel_scale;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Fate {
    /// Captured by the root with this index (into `Dynamics::roots`).
    Converged(usize),
    Escaped,
    HitPole,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitOutcome {
    pub fate: Fate,
    pub iterations: u32,
    pub final_point: Complex64,
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitParams {
    /// Capture when within `capture_radius_factor * max(1, |root|)` of a root.
    pub capture_radius_factor: f64,
    pub escape_radius: f64,
    /// Consecutive iterates beyond `escape_radius` before declaring escape.
    pub escape_hold: u32,
    /// A point within this distance of a pole of `N` counts as hitting it.
    pub pole_distance: f64,
    /// Built-in only: consecutive strictly-increasing real parts before
    /// declaring rightward escape, and the minimum real part for it. The
    /// virtual basins of `z exp(exp(z))` escape rightward with |z| growing
    /// far too slowly for the magnitude criterion.
    pub re_increase_hold: u32,
    pub re_escape_min: f64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams {
            capture_radius_factor: 1e-8,
            escape_radius: 1e6,
            escape_hold: 5,
            pole_distance: 1e-9,
            re_increase_hold: 5,
            re_escape_min: 2.0,
        }
    }
}

/// How a direct pole hit is handled mid-orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PolePolicy {
    /// Report `HitPole` immediately.
    Strict,
    /// Continue once from a deterministic tiny perturbation; report
    /// `HitPole` only if the perturbed point still sits on a pole. Used for
    /// pixel classification, where a lattice point landing exactly on a pole
    /// says nothing about the basin the pixel belongs to.
    PerturbOnce,
}

/// Per-pixel fates over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinRaster {
    pub window: Window,
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub cells: Vec<OrbitOutcome>,
}

impl BasinRaster {
    pub fn get(&self, row: usize, col: usize) -> &OrbitOutcome {
        &self.cells[row * self.width + col]
    }

    /// Complex coordinate of the pixel center at (row, col), top row first.
    pub fn pixel_center(window: &Window, width: usize, height: usize, row: usize, col: usize) -> Complex64 {
        let re = window.re_min + (col as f64 + 0.5) * window.width() / width as f64;
        let im = window.im_max - (row as f64 + 0.5) * window.height() / height as f64;
        Complex64::new(re, im)
    }
}

/// Angular arcs (closed-open, radians in [0, 2 pi)) of a sampling circle
/// belonging to one root's immediate basin.
///
/// Raw same-root runs on the circle split into channel arcs (crossings of the
/// immediate basin, whose orbit paths connect to the root inside the basin)
/// and debris arcs (non-immediate basin components: self-similar chains of
/// bounded pieces along the Julia rays, which cross every large circle and
/// whose count grows without bound as the sampling refines).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelReport {
    pub root: Complex64,
    pub root_index: usize,
    pub sample_radius: f64,
    /// Immediate-basin arcs only.
    pub arcs: Vec<(f64, f64)>,
    pub channel_count: usize,
    /// Same-root arcs that failed the immediate-basin connectivity test.
    pub debris_arcs: usize,
    /// Critical points of `N` (counted with multiplicity) inside this root's
    /// immediate basin.
    pub critical_count: usize,
    /// False when any circle sample, critical-point orbit, or connectivity
    /// probe was undecided; increase the budget or sample count in that case.
    pub reliable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InterChannelGap {
    pub root_index: usize,
    /// Angular interval not converging to the root, bounded on both sides by
    /// arcs that do.
    pub gap: (f64, f64),
    /// A sample angle inside the gap converging to a different root, if any.
    pub witness_angle: Option<f64>,
    pub witness_root: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorollaryReport {
    pub gaps: Vec<InterChannelGap>,
    pub all_gaps_contain_other_roots: bool,
    pub reliable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearizationReport {
    /// (radius, max deviation of `N(z) d / ((d-1) z)` from 1 on the circle).
    pub deviations: Vec<(f64, f64)>,
    /// Fitted constant: max over radii of `deviation * radius`.
    pub fitted_constant: f64,
    pub strictly_decreasing: bool,
}

/// Orbit machinery for one function: the spec plus its precomputed roots and
/// poles. Everything here is pure; instances are safe to share across
/// threads.
pub struct Dynamics {
    spec: FunctionSpec,
    roots: Vec<(Complex64, usize)>,
    poles: Vec<Complex64>,
    pub params: OrbitParams,
}

impl Dynamics {
    pub fn new(spec: FunctionSpec) -> Result<Self> {
        let roots = match spec.registry_roots() {
            Some(r) => r,
            None => find_roots(&spec)?,
        };
        let poles = match &spec {
            FunctionSpec::Builtin(_) => vec![],
            _ => spec.newton_poles()?.into_iter().map(|p| p.0).collect(),
        };
        Ok(Dynamics {
            spec,
            roots,
            poles,
            params: OrbitParams::default(),
        })
    }

    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    /// Roots in deterministic order; `Fate::Converged` indexes into this.
    pub fn roots(&self) -> &[(Complex64, usize)] {
        &self.roots
    }

    fn near_pole(&self, z: Complex64) -> bool {
        self.poles
            .iter()
            .any(|&p| (z - p).norm() <= self.params.pole_distance * rel_scale(p))
    }

    fn capture_index(&self, z: Complex64) -> Option<usize> {
        self.roots.iter().position(|&(root, _)| {
            (z - root).norm() <= self.params.capture_radius_factor * rel_scale(root)
        })
    }

    /// Iterate from `z0`. A pole hit is a fate, not an error.
    pub fn iterate(&self, z0: Complex64, budget: u32) -> OrbitOutcome {
        self.iterate_inner(z0, budget, PolePolicy::Strict, None)
    }

    /// Iterate, recording the visited points (including `z0`).
    pub fn iterate_with_trace(&self, z0: Complex64, budget: u32) -> (OrbitOutcome, Vec<Complex64>) {
        let mut trace = Vec::new();
        let outcome = self.iterate_inner(z0, budget, PolePolicy::Strict, Some(&mut trace));
        (outcome, trace)
    }

    fn iterate_pixel(&self, z0: Complex64, budget: u32) -> OrbitOutcome {
        self.iterate_inner(z0, budget, PolePolicy::PerturbOnce, None)
    }

    fn iterate_inner(
        &self,
        z0: Complex64,
        budget: u32,
        pole_policy: PolePolicy,
        mut trace: Option<&mut Vec<Complex64>>,
    ) -> OrbitOutcome {
        let is_builtin = matches!(self.spec, FunctionSpec::Builtin(_));
        let mut z = z0;
        let mut escape_run = 0u32;
        let mut re_run = 0u32;
        let mut prev_re = f64::INFINITY;
        for n in 0..=budget {
            if let Some(t) = trace.as_deref_mut() {
                t.push(z);
            }
            if let Some(i) = self.capture_index(z) {
                return OrbitOutcome {
                    fate: Fate::Converged(i),
                    iterations: n,
                    final_point: z,
                };
            }
            if z.norm() > self.params.escape_radius {
                escape_run += 1;
                if escape_run >= self.params.escape_hold {
                    return OrbitOutcome {
                        fate: Fate::Escaped,
                        iterations: n,
                        final_point: z,
                    };
                }
            } else {
                escape_run = 0;
            }
            if is_builtin {
                if z.re > prev_re {
                    re_run += 1;
                    if re_run >= self.params.re_increase_hold && z.re > self.params.re_escape_min {
                        return OrbitOutcome {
                            fate: Fate::Escaped,
                            iterations: n,
                            final_point: z,
                        };
                    }
                } else {
                    re_run = 0;
                }
                prev_re = z.re;
            }
            if n == budget {
                break;
            }
            let pole_here = self.near_pole(z);
            let ev = self.spec.newton(z);
            let next = if pole_here || ev.status == EvalStatus::PoleOfNewton {
                match pole_policy {
                    PolePolicy::Strict => {
                        return OrbitOutcome {
                            fate: Fate::HitPole,
                            iterations: n,
                            final_point: z,
                        }
                    }
                    PolePolicy::PerturbOnce => {
                        let nudge = 1e-9 * rel_scale(z);
                        let z2 = z + Complex64::new(nudge, nudge);
                        let ev2 = self.spec.newton(z2);
                        if self.near_pole(z2) || !ev2.is_finite() {
                            return OrbitOutcome {
                                fate: Fate::HitPole,
                                iterations: n,
                                final_point: z,
                            };
                        }
                        ev2.value
                    }
                }
            } else if ev.status == EvalStatus::Overflow || !ev.value.is_finite() {
                // The map left the representable plane: treat as escape.
                return OrbitOutcome {
                    fate: Fate::Escaped,
                    iterations: n,
                    final_point: z,
                };
            } else {
                ev.value
            };
            z = next;
        }
        OrbitOutcome {
            fate: Fate::Undecided,
            iterations: budget,
            final_point: z,
        }
    }

    /// Classify every pixel center of a `width x height` grid over `window`.
    /// Deterministic for fixed inputs; rows are computed in parallel.
    pub fn raster(&self, window: Window, width: usize, height: usize, budget: u32) -> BasinRaster {
        assert!(width > 0 && height > 0, "raster must not be degenerate");
        assert!(window.width() > 0.0 && window.height() > 0.0);
        let cells: Vec<OrbitOutcome> = (0..height)
            .into_par_iter()
            .flat_map_iter(|row| {
                (0..width).map(move |col| {
                    let z = BasinRaster::pixel_center(&window, width, height, row, col);
                    self.iterate_pixel(z, budget)
                })
            })
            .collect();
        BasinRaster {
            window,
            width,
            height,
            cells,
        }
    }

    /// Outcomes of `samples` equally spaced points on the circle of given
    /// radius about the origin, starting at angle 0.
    pub fn circle_outcomes(&self, radius: f64, samples: usize, budget: u32) -> Vec<OrbitOutcome> {
        (0..samples)
            .into_par_iter()
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * (j as f64) / (samples as f64);
                self.iterate(radius * Complex64::new(theta.cos(), theta.sin()), budget)
            })
            .collect()
    }

    /// Critical points of the Newton map with multiplicity: zeros of `N'`
    /// away from its poles. For a polynomial these are the simple roots of
    /// `f` together with the non-cancelled zeros of `f''`.
    pub fn critical_points(&self) -> Result<Vec<(Complex64, usize)>> {
        let (num, den) = self
            .spec
            .newton_pair()
            .ok_or(Error::Unsupported("critical point enumeration"))?;
        // N = num/den, N' = (num' den - num den')/den^2.
        let wronskian = num
            .derivative()
            .mul(&den)
            .sub(&num.mul(&den.derivative()));
        if wronskian.degree().unwrap_or(0) == 0 {
            return Ok(vec![]);
        }
        let clustered = cluster_roots(&wronskian.roots()?, 1e-7);
        Ok(clustered
            .into_iter()
            .filter(|(z, _)| !den.vanishes_at(*z, 1e-8))
            .collect())
    }

    /// Does the orbit of `z` converge to root `root_idx` along a path that
    /// stays inside that root's basin? The orbit polyline is resampled at
    /// `SUBDIV` interior points per step, each of which must converge to the
    /// same root; an orbit visiting a different basin component has to jump
    /// across foreign territory, which the resampling detects. None when a
    /// probe was undecided.
    fn path_connected_to_root(&self, z: Complex64, root_idx: usize, budget: u32) -> Option<bool> {
        const SUBDIV: usize = 12;
        let (outcome, trace) = self.iterate_with_trace(z, budget);
        match outcome.fate {
            Fate::Converged(i) if i == root_idx => {}
            Fate::Undecided => return None,
            _ => return Some(false),
        }
        for pair in trace.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            for k in 1..SUBDIV {
                let p = a + (b - a) * (k as f64 / SUBDIV as f64);
                match self.iterate(p, budget).fate {
                    Fate::Converged(i) if i == root_idx => {}
                    Fate::Undecided => return None,
                    _ => return Some(false),
                }
            }
        }
        Some(true)
    }

    /// Channel reports for all roots from one shared circle classification.
    pub fn channel_reports(
        &self,
        sample_radius: f64,
        samples: usize,
        budget: u32,
    ) -> Result<Vec<ChannelReport>> {
        if sample_radius < 4.0 {
            return Err(Error::InvalidSpec(
                "channel sampling radius must be >= 4 (outside the conjugacy disk)".into(),
            ));
        }
        let outcomes = self.circle_outcomes(sample_radius, samples, budget);
        let undecided = outcomes.iter().any(|o| o.fate == Fate::Undecided);

        // Maximal runs of equal fate around the circle, ties resolved toward
        // the lower angle by the closed-open convention.
        let runs = circle_runs(&outcomes);
        let two_pi = 2.0 * std::f64::consts::PI;
        let n = samples as f64;

        // Sort critical points into immediate basins.
        let crit = self.critical_points()?;
        let mut probes_undecided = false;
        let mut crit_owner: Vec<(usize, usize)> = Vec::new(); // (root index, multiplicity)
        for &(cp, m) in &crit {
            if let Fate::Converged(i) = self.iterate(cp, budget).fate {
                match self.path_connected_to_root(cp, i, budget) {
                    Some(true) => crit_owner.push((i, m)),
                    Some(false) => {}
                    None => probes_undecided = true,
                }
            } else if self.iterate(cp, budget).fate == Fate::Undecided {
                probes_undecided = true;
            }
        }

        // Classify each same-root run as channel or debris by probing up to
        // three of its samples for basin connectivity to the root.
        let classified: Vec<Option<bool>> = runs
            .par_iter()
            .map(|run| {
                let Fate::Converged(idx) = run.fate else {
                    return Some(false);
                };
                let mut inconclusive = false;
                for frac in [0.5, 0.25, 0.75] {
                    let offset = ((run.len as f64 * frac) as usize).min(run.len - 1);
                    let j = (run.start + offset) % outcomes.len();
                    let theta = two_pi * j as f64 / n;
                    let z = sample_radius * Complex64::new(theta.cos(), theta.sin());
                    match self.path_connected_to_root(z, idx, budget) {
                        Some(true) => return Some(true),
                        Some(false) => {}
                        None => inconclusive = true,
                    }
                }
                if inconclusive {
                    None
                } else {
                    Some(false)
                }
            })
            .collect();
        probes_undecided |= classified.iter().any(|c| c.is_none());

        let mut reports = Vec::with_capacity(self.roots.len());
        for (idx, &(root, _)) in self.roots.iter().enumerate() {
            let mut arcs = Vec::new();
            let mut debris_arcs = 0usize;
            for (run, is_channel) in runs.iter().zip(&classified) {
                if run.fate != Fate::Converged(idx) {
                    continue;
                }
                if *is_channel == Some(true) {
                    arcs.push((
                        two_pi * run.start as f64 / n,
                        two_pi * (run.start + run.len) as f64 / n,
                    ));
                } else {
                    debris_arcs += 1;
                }
            }
            let critical_count = crit_owner
                .iter()
                .filter(|&&(i, _)| i == idx)
                .map(|&(_, m)| m)
                .sum();
            reports.push(ChannelReport {
                root,
                root_index: idx,
                sample_radius,
                channel_count: arcs.len(),
                arcs,
                debris_arcs,
                critical_count,
                reliable: !undecided && !probes_undecided,
            });
        }
        Ok(reports)
    }

    /// Channel report for the root nearest `root`.
    pub fn detect_channels(
        &self,
        root: Complex64,
        sample_radius: f64,
        samples: usize,
        budget: u32,
    ) -> Result<ChannelReport> {
        let idx = self
            .roots
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = (a.1 .0 - root).norm();
                let db = (b.1 .0 - root).norm();
                da.partial_cmp(&db).unwrap()
            })
            .map(|(i, _)| i)
            .ok_or(Error::InvalidSpec("function has no roots".into()))?;
        Ok(self
            .channel_reports(sample_radius, samples, budget)?
            .swap_remove(idx))
    }

    /// For each root, every maximal circle arc that does not converge to it
    /// but is bounded on both sides by arcs that do must contain a sample
    /// converging to a different root.
    pub fn verify_root_between_channels(
        &self,
        sample_radius: f64,
        samples: usize,
        budget: u32,
    ) -> Result<CorollaryReport> {
        if sample_radius < 4.0 {
            return Err(Error::InvalidSpec(
                "sampling radius must be >= 4 (outside the conjugacy disk)".into(),
            ));
        }
        let outcomes = self.circle_outcomes(sample_radius, samples, budget);
        let reliable = !outcomes.iter().any(|o| o.fate == Fate::Undecided);
        let runs = circle_runs(&outcomes);
        let two_pi = 2.0 * std::f64::consts::PI;
        let n = samples as f64;

        let mut gaps = Vec::new();
        let mut all_pass = true;
        for idx in 0..self.roots.len() {
            let own: Vec<usize> = runs
                .iter()
                .enumerate()
                .filter(|(_, r)| r.fate == Fate::Converged(idx))
                .map(|(k, _)| k)
                .collect();
            if own.is_empty() {
                continue;
            }
            // Gap between consecutive own-arcs (wrapping): the runs strictly
            // between them.
            for w in 0..own.len() {
                let from_run = own[w];
                let to_run = own[(w + 1) % own.len()];
                let mut k = (from_run + 1) % runs.len();
                let mut witness = None;
                let mut gap_start = None;
                let mut gap_len = 0usize;
                while k != to_run {
                    let run = &runs[k];
                    if gap_start.is_none() {
                        gap_start = Some(run.start);
                    }
                    gap_len += run.len;
                    if witness.is_none() {
                        if let Fate::Converged(other) = run.fate {
                            if other != idx {
                                witness = Some((
                                    two_pi * (run.start as f64 + 0.5 * run.len as f64) / n,
                                    other,
                                ));
                            }
                        }
                    }
                    k = (k + 1) % runs.len();
                }
                let Some(gs) = gap_start else { continue }; // adjacent arcs, no gap
                gaps.push(InterChannelGap {
                    root_index: idx,
                    gap: (
                        two_pi * gs as f64 / n,
                        two_pi * (gs + gap_len) as f64 / n,
                    ),
                    witness_angle: witness.map(|w| w.0),
                    witness_root: witness.map(|w| w.1),
                });
                if witness.is_none() {
                    all_pass = false;
                }
            }
        }
        Ok(CorollaryReport {
            gaps,
            all_gaps_contain_other_roots: all_pass,
            reliable,
        })
    }

    /// Deviation of `N(z) d/((d-1) z)` from 1 on circles of the given radii;
    /// the map is conjugate to multiplication by `(d-1)/d` far out, so the
    /// maximum deviation must decay like `C/|z|`.
    pub fn verify_linearization(&self, radii: &[f64], samples: usize) -> Result<LinearizationReport> {
        let p = self
            .spec
            .root_polynomial()
            .ok_or(Error::Unsupported("linearization check"))?;
        let d = p.degree().unwrap_or(0) as f64;
        if d < 2.0 {
            return Err(Error::InvalidSpec(
                "linearization check needs degree >= 2".into(),
            ));
        }
        let factor = d / (d - 1.0);
        let mut deviations = Vec::with_capacity(radii.len());
        for &r in radii {
            let mut max_dev: f64 = 0.0;
            for j in 0..samples {
                let theta = 2.0 * std::f64::consts::PI * (j as f64) / (samples as f64);
                let z = r * Complex64::new(theta.cos(), theta.sin());
                if let Some(nz) = self.spec.newton(z).ok() {
                    let dev = (nz * factor / z - Complex64::new(1.0, 0.0)).norm();
                    max_dev = max_dev.max(dev);
                }
            }
            deviations.push((r, max_dev));
        }
        let fitted_constant = deviations
            .iter()
            .map(|&(r, dev)| r * dev)
            .fold(0.0, f64::max);
        let strictly_decreasing = deviations.windows(2).all(|w| w[1].1 < w[0].1);
        Ok(LinearizationReport {
            deviations,
            fitted_constant,
            strictly_decreasing,
        })
    }
}

struct CircleRun {
    fate: Fate,
    start: usize,
    len: usize,
}

/// Maximal runs of equal fate around the circle (index-wrapping).
fn circle_runs(outcomes: &[OrbitOutcome]) -> Vec<CircleRun> {
    let n = outcomes.len();
    let mut runs: Vec<CircleRun> = Vec::new();
    for (j, o) in outcomes.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.fate == o.fate => run.len += 1,
            _ => runs.push(CircleRun {
                fate: o.fate,
                start: j,
                len: 1,
            }),
        }
    }
    // Merge a wrapping run: last and first share a fate.
    if runs.len() > 1 && runs.first().unwrap().fate == runs.last().unwrap().fate {
        let last = runs.pop().unwrap();
        let first = &mut runs[0];
        first.start = last.start;
        first.len += last.len;
        // start index now exceeds n; normalize modulo n for angle reporting.
        first.start %= n;
    }
    runs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[f64]) -> Dynamics {
        Dynamics::new(
            FunctionSpec::polynomial(coeffs.iter().map(|&x| c(x, 0.0)).collect()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn orbit_converges_in_right_half_plane() {
        let dyn_ = poly(&[-1.0, 0.0, 1.0]);
        let out = dyn_.iterate(c(3.0, 0.0), 100);
        match out.fate {
            Fate::Converged(i) => assert!((dyn_.roots()[i].0 - c(1.0, 0.0)).norm() < 1e-9),
            other => panic!("expected convergence, got {other:?}"),
        }
        assert!(out.iterations > 0);
    }

    #[test]
    fn orbit_hits_pole_at_origin() {
        let dyn_ = poly(&[-1.0, 0.0, 1.0]);
        let out = dyn_.iterate(c(0.0, 0.0), 100);
        assert_eq!(out.fate, Fate::HitPole);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn builtin_strip_point_escapes_rightward() {
        let dyn_ = Dynamics::new(FunctionSpec::builtin("z_exp_exp_z").unwrap()).unwrap();
        let (out, trace) = dyn_.iterate_with_trace(c(2.0, 3.0 * std::f64::consts::PI), 200);
        assert_eq!(out.fate, Fate::Escaped);
        for w in trace.windows(2) {
            assert!(w[1].re > w[0].re, "real parts must increase: {w:?}");
        }
    }

    #[test]
    fn builtin_left_half_plane_converges_to_origin() {
        let dyn_ = Dynamics::new(FunctionSpec::builtin("z_exp_exp_z").unwrap()).unwrap();
        let out = dyn_.iterate(c(-5.0, 2.0), 200);
        assert_eq!(out.fate, Fate::Converged(0));
    }

    #[test]
    fn basin_membership_is_invariant_under_the_map() {
        let dyn_ = poly(&[-1.0, 0.0, 0.0, 1.0]); // z^3 - 1
        let mut checked = 0;
        for k in 0..200 {
            // Deterministic scatter of start points.
            let t = k as f64;
            let z0 = c(
                1.7 * ((t * 0.37).sin()),
                1.7 * ((t * 0.73).cos()),
            );
            let out = dyn_.iterate(z0, 300);
            let Fate::Converged(i) = out.fate else { continue };
            if out.iterations == 0 {
                continue;
            }
            let next = dyn_.spec().newton(z0).ok().unwrap();
            let out2 = dyn_.iterate(next, 300);
            assert_eq!(out2.fate, Fate::Converged(i));
            assert_eq!(out2.iterations, out.iterations - 1);
            checked += 1;
        }
        assert!(checked > 100, "too few convergent samples: {checked}");
    }

    #[test]
    fn raster_splits_half_planes() {
        let dyn_ = poly(&[-1.0, 0.0, 1.0]);
        let raster = dyn_.raster(Window::square(2.0), 64, 64, 200);
        assert_eq!(raster.cells.len(), 64 * 64);
        let left_root = dyn_
            .roots()
            .iter()
            .position(|r| (r.0 - c(-1.0, 0.0)).norm() < 1e-9)
            .unwrap();
        let right_root = dyn_
            .roots()
            .iter()
            .position(|r| (r.0 - c(1.0, 0.0)).norm() < 1e-9)
            .unwrap();
        for row in 0..64 {
            for col in 0..64 {
                let z = BasinRaster::pixel_center(&raster.window, 64, 64, row, col);
                let cell = raster.get(row, col);
                // Clearly off the axis every pixel must land on its side.
                if z.re > 0.2 {
                    assert_eq!(cell.fate, Fate::Converged(right_root), "pixel at {z}");
                } else if z.re < -0.2 {
                    assert_eq!(cell.fate, Fate::Converged(left_root), "pixel at {z}");
                }
            }
        }
    }

    #[test]
    fn raster_is_deterministic() {
        let dyn_ = poly(&[-1.0, 0.0, 0.0, 1.0]);
        let a = dyn_.raster(Window::square(2.0), 48, 48, 120);
        let b = dyn_.raster(Window::square(2.0), 48, 48, 120);
        assert_eq!(a, b);
    }

    #[test]
    fn cubic_raster_is_threefold_symmetric() {
        // N of z^3-1 commutes with rotation by 2 pi/3; check fresh orbits at
        // rotated pixel centers for confidently converged pixels.
        let dyn_ = poly(&[-1.0, 0.0, 0.0, 1.0]);
        let budget = 300;
        let raster = dyn_.raster(Window::square(2.0), 64, 64, budget);
        let rot = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let mut checked = 0;
        for row in (0..64).step_by(3) {
            for col in (0..64).step_by(3) {
                let cell = raster.get(row, col);
                let Fate::Converged(i) = cell.fate else { continue };
                if cell.iterations > budget / 2 {
                    continue; // too close to the basin boundary
                }
                let z = BasinRaster::pixel_center(&raster.window, 64, 64, row, col);
                let out = dyn_.iterate(rot * z, budget);
                let Fate::Converged(j) = out.fate else {
                    panic!("rotated point did not converge")
                };
                let expected = rot * dyn_.roots()[i].0;
                assert!((dyn_.roots()[j].0 - expected).norm() < 1e-6);
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn channels_of_quadratic() {
        let dyn_ = poly(&[-1.0, 0.0, 1.0]);
        let report = dyn_.detect_channels(c(1.0, 0.0), 10.0, 4096, 1000).unwrap();
        assert!(report.reliable);
        assert_eq!(report.channel_count, 1);
        assert_eq!(report.critical_count, 1);
    }

    #[test]
    fn channels_of_cubic_by_root() {
        let dyn_ = poly(&[-1.0, 0.0, 0.0, 1.0]);
        let reports = dyn_.channel_reports(10.0, 4096, 1000).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert!(r.reliable, "undecided samples on the circle");
            assert_eq!(r.channel_count, 1, "root {}", r.root);
            assert_eq!(r.critical_count, 1);
            // The non-immediate basin components along the Julia rays cross
            // the circle too; they must be filtered out, not counted.
            assert!(r.debris_arcs > 0, "expected debris arcs at this resolution");
        }
    }

    #[test]
    fn one_root_function_covers_whole_circle() {
        // f = a(z - xi)^d: the single basin is the whole plane, one arc.
        let p = Poly::from_roots(&[(c(0.2, 0.1), 4)], c(3.0, 0.0));
        let dyn_ = Dynamics::new(FunctionSpec::polynomial(p.coeffs().to_vec()).unwrap()).unwrap();
        let report = dyn_.detect_channels(c(0.2, 0.1), 10.0, 512, 400).unwrap();
        assert_eq!(report.channel_count, 1);
        let (lo, hi) = report.arcs[0];
        assert!(lo.abs() < 1e-12 && (hi - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn root_between_channels_for_small_cases() {
        for coeffs in [&[-1.0, 0.0, 1.0][..], &[-1.0, 0.0, 0.0, 1.0][..]] {
            let dyn_ = poly(coeffs);
            let report = dyn_
                .verify_root_between_channels(10.0, 2048, 1000)
                .unwrap();
            assert!(report.reliable);
            assert!(report.all_gaps_contain_other_roots);
        }
    }

    #[test]
    fn linearization_deviation_decays() {
        let dyn_ = poly(&[-1.0, 0.0, 1.0]);
        let report = dyn_
            .verify_linearization(&[10.0, 100.0, 1000.0], 512)
            .unwrap();
        assert!(report.strictly_decreasing);
        // N(z) = z/2 + 1/(2z): deviation 1/z^2 scales down 100x per decade.
        let ratio = report.deviations[0].1 / report.deviations[1].1;
        assert!(ratio > 50.0 && ratio < 200.0, "expected ~|z|^-2: {ratio}");
    }

    #[test]
    fn linearization_of_pure_power_is_exact() {
        let p = Poly::from_roots(&[(c(0.0, 0.0), 5)], c(1.0, 0.0));
        let dyn_ = Dynamics::new(FunctionSpec::polynomial(p.coeffs().to_vec()).unwrap()).unwrap();
        let report = dyn_.verify_linearization(&[10.0, 100.0], 256).unwrap();
        for &(_, dev) in &report.deviations {
            assert!(dev < 1e-14);
        }
        // Shifted power: deviation bounded by (|xi| + 1)/|z|.
        let p = Poly::from_roots(&[(c(0.5, 0.3), 4)], c(2.0, 0.0));
        let dyn_ = Dynamics::new(FunctionSpec::polynomial(p.coeffs().to_vec()).unwrap()).unwrap();
        let report = dyn_.verify_linearization(&[10.0, 100.0], 256).unwrap();
        let xi_norm = c(0.5, 0.3).norm();
        for &(r, dev) in &report.deviations {
            assert!(dev <= (xi_norm + 1.0) / r);
        }
        // Cubic at radius 10 stays within the brute-force bound.
        let dyn_ = poly(&[-1.0, 0.0, 0.0, 1.0]);
        let report = dyn_.verify_linearization(&[10.0], 4096).unwrap();
        assert!(report.deviations[0].1 <= 0.05);
    }

    #[test]
    fn figure_strip_samples_escape() {
        let dyn_ = Dynamics::new(FunctionSpec::builtin("z_exp_exp_z").unwrap()).unwrap();
        for k in [-2i32, -1, 0, 1, 2] {
            let im = (2.0 * k as f64 + 1.0) * std::f64::consts::PI;
            let mut t = 2.0;
            while t <= 12.0 {
                let out = dyn_.iterate(c(t, im), 200);
                assert_eq!(out.fate, Fate::Escaped, "strip sample {t}+{im}i");
                t += 0.1;
            }
        }
    }
}

