//! Dense complex polynomials in ascending coefficient order.
//!
//! Evaluation uses Horner's scheme and tracks the magnitude of the largest
//! monomial term, which is the scale against which "this value is zero" is
//! decided everywhere in the crate. Derivatives are coefficient shifts.
//! Roots come from simultaneous Aberth-Ehrlich iteration.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficient magnitudes below `eps * scale` count as zero in the
/// approximate division/GCD routines.
pub const GCD_COEFF_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    /// Ascending degree order; empty means the zero polynomial.
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// Expand `lead * prod (z - root_j)^{m_j}` by repeated convolution.
    pub fn from_roots(roots: &[(Complex64, usize)], lead: Complex64) -> Self {
        let mut coeffs = vec![lead];
        for &(root, mult) in roots {
            for _ in 0..mult {
                // multiply by (z - root)
                let mut next = vec![ZERO; coeffs.len() + 1];
                for (k, &c) in coeffs.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= c * root;
                }
                coeffs = next;
            }
        }
        Poly::new(coeffs)
    }

    fn trim(&mut self) {
        while let Some(c) = self.coeffs.last() {
            if c.re == 0.0 && c.im == 0.0 {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap_or(&ZERO)
    }

    pub fn linf_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Value together with `max_k |a_k| |z|^k`, the magnitude of the largest
    /// monomial term at `z`.
    pub fn eval_with_scale(&self, z: Complex64) -> (Complex64, f64) {
        let r = z.norm();
        let mut pow = 1.0_f64;
        let mut scale = 0.0_f64;
        for c in &self.coeffs {
            scale = scale.max(c.norm() * pow);
            pow *= r;
        }
        (self.eval(z), scale)
    }

    /// Is the value at `z` zero relative to the largest monomial term?
    pub fn vanishes_at(&self, z: Complex64, rel_tol: f64) -> bool {
        let (v, scale) = self.eval_with_scale(z);
        v.norm() <= rel_tol * scale.max(f64::MIN_POSITIVE)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * (k as f64))
            .collect();
        Poly::new(coeffs)
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![ZERO; n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[k] += c;
        }
        for (k, &c) in rhs.coeffs.iter().enumerate() {
            coeffs[k] += c;
        }
        Poly::new(coeffs)
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        self.add(&rhs.scale(-ONE))
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }

    /// Multiply by z^k.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        Poly::new(coeffs)
    }

    /// Quotient and remainder. Panics on division by the zero polynomial.
    pub fn div_rem(&self, rhs: &Poly) -> (Poly, Poly) {
        assert!(!rhs.is_zero(), "division by zero polynomial");
        let dr = rhs.degree().unwrap();
        if self.coeffs.len() <= dr {
            return (Poly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dq = rem.len() - 1 - dr;
        let mut quot = vec![ZERO; dq + 1];
        let lead = rhs.leading();
        for k in (0..=dq).rev() {
            let q = rem[k + dr] / lead;
            quot[k] = q;
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                rem[k + j] -= q * b;
            }
        }
        rem.truncate(dr);
        (Poly::new(quot), Poly::new(rem))
    }

    /// Zero out coefficients at or below `bound` in magnitude.
    fn chop_abs(&self, bound: f64) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .map(|&c| if c.norm() <= bound { ZERO } else { c })
                .collect(),
        )
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(ONE / self.leading())
    }

    /// Approximate monic GCD by the Euclidean algorithm. Remainder
    /// coefficients below `tol` relative to the operand scale count as zero;
    /// the operands are monic, so that scale stays O(1) at desk degrees.
    pub fn gcd_approx(&self, rhs: &Poly, tol: f64) -> Poly {
        let mut f = self.monic();
        let mut g = rhs.monic();
        if f.degree() < g.degree() {
            std::mem::swap(&mut f, &mut g);
        }
        while !g.is_zero() {
            let scale = f.linf_norm().max(g.linf_norm()).max(1.0);
            let (_, r) = f.div_rem(&g);
            let r = r.chop_abs(tol * scale);
            f = g;
            g = r.monic();
        }
        f
    }

    /// All roots, unclustered. Exact zero roots are deflated first; the rest
    /// come from Aberth-Ehrlich simultaneous iteration started on a perturbed
    /// circle, with one Newton polish per root.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let degree = match self.degree() {
            None | Some(0) => return Ok(vec![]),
            Some(d) => d,
        };
        let mut roots = Vec::with_capacity(degree);

        // Deflate roots at the origin exactly.
        let norm = self.linf_norm();
        let zeros = self
            .coeffs
            .iter()
            .take_while(|c| c.norm() <= 1e-15 * norm)
            .count();
        for _ in 0..zeros {
            roots.push(ZERO);
        }
        let work = Poly::new(self.coeffs[zeros..].to_vec());
        let d = match work.degree() {
            None | Some(0) => return Ok(roots),
            Some(d) => d,
        };

        if d == 1 {
            roots.push(-work.coeffs[0] / work.coeffs[1]);
            return Ok(roots);
        }

        roots.extend(work.aberth(200)?);
        Ok(roots)
    }

    fn aberth(&self, max_iter: usize) -> Result<Vec<Complex64>> {
        let d = self.degree().unwrap();
        let deriv = self.derivative();
        let lead = self.leading();

        // Cauchy bound on root magnitude.
        let bound = 1.0
            + self.coeffs[..d]
                .iter()
                .map(|c| (c / lead).norm())
                .fold(0.0, f64::max);

        // Perturbed circle of initial guesses.
        let mut z: Vec<Complex64> = (0..d)
            .map(|j| {
                let jitter = 1.0 + 0.08 * ((j as f64 * 0.618_033_988_749_895).fract() - 0.5);
                let theta = 2.0 * std::f64::consts::PI * (j as f64) / (d as f64) + 0.4;
                0.85 * bound * jitter * Complex64::new(theta.cos(), theta.sin())
            })
            .collect();

        let eps = f64::EPSILON;
        for _ in 0..max_iter {
            let mut all_settled = true;
            for j in 0..d {
                let (pv, scale) = self.eval_with_scale(z[j]);
                if pv.norm() <= 4.0 * eps * scale {
                    continue; // residual at the rounding floor of evaluation
                }
                let dv = deriv.eval(z[j]);
                if dv.norm() == 0.0 {
                    let nudge = z[j].norm().max(1.0);
                    z[j] += Complex64::new(1e-6, 1e-6) * nudge;
                    all_settled = false;
                    continue;
                }
                let w = pv / dv;
                let mut s = ZERO;
                for k in 0..d {
                    if k != j {
                        let diff = z[j] - z[k];
                        if diff.norm() > 1e-300 {
                            s += ONE / diff;
                        }
                    }
                }
                let denom = ONE - w * s;
                let correction = if denom.norm() < 1e-12 { w } else { w / denom };
                z[j] -= correction;
                if correction.norm() > 1e-13 * z[j].norm().max(1.0) {
                    all_settled = false;
                }
            }
            if all_settled {
                break;
            }
        }

        // Accept only backward-stable roots.
        for &r in &z {
            let (pv, scale) = self.eval_with_scale(r);
            if !(pv.norm() <= 1e-10 * scale.max(f64::MIN_POSITIVE)) {
                return Err(Error::RootFinding {
                    spec: format!("polynomial of degree {d}"),
                    iterations: max_iter,
                });
            }
        }

        // One Newton polish per root.
        for r in z.iter_mut() {
            let pv = self.eval(*r);
            let dv = deriv.eval(*r);
            if dv.norm() > 1e-300 {
                let step = pv / dv;
                if step.norm() < 0.1 * r.norm().max(1.0) {
                    *r -= step;
                }
            }
        }
        Ok(z)
    }
}

/// Greedy single-linkage clustering of raw roots; returns (mean, count) per
/// cluster. `radius_factor` scales with `max(1, |root|)`.
pub fn cluster_roots(raw: &[Complex64], radius_factor: f64) -> Vec<(Complex64, usize)> {
    let n = raw.len();
    let mut assigned = vec![usize::MAX; n];
    let mut next_cluster = 0;
    for i in 0..n {
        if assigned[i] != usize::MAX {
            continue;
        }
        assigned[i] = next_cluster;
        // BFS over points linked within the cluster radius.
        let mut frontier = vec![i];
        while let Some(a) = frontier.pop() {
            for b in 0..n {
                if assigned[b] != usize::MAX {
                    continue;
                }
                let tol = radius_factor * raw[a].norm().max(1.0);
                if (raw[a] - raw[b]).norm() <= tol {
                    assigned[b] = next_cluster;
                    frontier.push(b);
                }
            }
        }
        next_cluster += 1;
    }
    let mut clusters = vec![(ZERO, 0usize); next_cluster];
    for (idx, &c) in assigned.iter().enumerate() {
        clusters[c].0 += raw[idx];
        clusters[c].1 += 1;
    }
    for c in clusters.iter_mut() {
        c.0 /= c.1 as f64;
    }
    // Deterministic order: by (re, im) of the mean.
    clusters.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn horner_matches_direct_sum() {
        let p = Poly::new(vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]); // z^2 - 1
        assert_eq!(p.eval(c(2.0, 0.0)), c(3.0, 0.0));
        assert_eq!(p.eval(c(1.0, 0.0)), c(0.0, 0.0));
        let q = Poly::new(vec![c(1.0, 2.0), c(0.5, 0.0), c(0.0, -1.0)]);
        let z = c(1.3, -0.7);
        let direct = c(1.0, 2.0) + c(0.5, 0.0) * z + c(0.0, -1.0) * z * z;
        assert!((q.eval(z) - direct).norm() < 1e-14);
    }

    #[test]
    fn derivative_is_coefficient_shift() {
        let p = Poly::new(vec![c(4.0, 0.0), c(0.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]);
        let d = p.derivative();
        assert_eq!(d.coeffs(), &[c(0.0, 0.0), c(-6.0, 0.0), c(3.0, 0.0)]);
    }

    #[test]
    fn division_reconstructs() {
        let a = Poly::from_roots(&[(c(1.0, 0.0), 2), (c(-2.0, 1.0), 1)], c(2.0, 0.0));
        let b = Poly::from_roots(&[(c(1.0, 0.0), 1)], c(1.0, 0.0));
        let (q, r) = a.div_rem(&b);
        assert!(r.is_zero() || r.linf_norm() < 1e-12);
        let back = q.mul(&b).add(&r);
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn gcd_finds_shared_double_root() {
        // p = (z-1)^2 (z+1), p' shares exactly (z-1)
        let p = Poly::from_roots(&[(c(1.0, 0.0), 2), (c(-1.0, 0.0), 1)], c(1.0, 0.0));
        let g = p.gcd_approx(&p.derivative(), GCD_COEFF_TOL);
        assert_eq!(g.degree(), Some(1));
        assert!((g.eval(c(1.0, 0.0))).norm() < 1e-10);
    }

    #[test]
    fn gcd_of_coprime_is_constant() {
        let p = Poly::from_roots(
            &[(c(0.3, 0.4), 1), (c(-0.5, 0.1), 1), (c(0.0, -0.7), 1)],
            c(1.0, 0.0),
        );
        let g = p.gcd_approx(&p.derivative(), GCD_COEFF_TOL);
        assert_eq!(g.degree(), Some(0));
    }

    #[test]
    fn roots_of_expanded_product_are_recovered() {
        let truth = [c(0.3, 0.4), c(-0.6, 0.0), c(0.1, -0.8), c(0.7, 0.2)];
        let p = Poly::from_roots(&truth.map(|r| (r, 1)), c(1.0, 0.0));
        let mut found = p.roots().unwrap();
        assert_eq!(found.len(), 4);
        for t in truth {
            let (i, _) = found
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - t)
                        .norm()
                        .partial_cmp(&(b.1 - t).norm())
                        .unwrap()
                })
                .unwrap();
            assert!((found[i] - t).norm() < 1e-10, "missed root {t}");
            found.remove(i);
        }
    }

    #[test]
    fn zero_roots_deflate_exactly() {
        // 2 z^3
        let p = Poly::new(vec![ZERO, ZERO, ZERO, c(2.0, 0.0)]);
        let roots = p.roots().unwrap();
        assert_eq!(roots, vec![ZERO, ZERO, ZERO]);
    }

    #[test]
    fn clustering_merges_double_root() {
        let raw = [
            c(1.0 + 3e-8, 0.0),
            c(1.0 - 3e-8, 1e-8),
            c(-1.0, 0.0),
        ];
        let clusters = cluster_roots(&raw, 1e-7);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].1, 1); // -1 sorts first
        assert_eq!(clusters[1].1, 2);
        assert!((clusters[1].0 - c(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn double_root_is_clustered_with_its_multiplicity() {
        // Expansion noise splits a double root by ~sqrt(eps); the cluster
        // radius 1e-7 merges the pair and the mean lands well inside it.
        let p = Poly::from_roots(&[(c(0.4, 0.3), 2), (c(-0.5, -0.2), 1)], c(1.0, 0.0));
        let clusters = cluster_roots(&p.roots().unwrap(), 1e-7);
        assert_eq!(clusters.len(), 2);
        let double = clusters.iter().find(|c| c.1 == 2).expect("double root");
        assert!((double.0 - c(0.4, 0.3)).norm() < 1e-7);
    }
}
