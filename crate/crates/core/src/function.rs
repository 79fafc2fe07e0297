//! Entire functions and robust evaluation of their Newton maps.
//!
//! Three representations are supported: plain polynomials, the family
//! `p * exp(q)` with polynomial `p`, `q` (the only entire functions with a
//! rational Newton map), and a registry of named transcendental built-ins,
//! currently `z_exp_exp_z` for `f(z) = z * exp(exp(z))`.
//!
//! Newton maps of the exponential families are always evaluated in the
//! algebraically simplified, exponential-free form: `z - p/(p' + q'p)` and
//! `z - z/(1 + z e^z)` respectively. The unsimplified form overflows as soon
//! as `Re(e^z)` exceeds ~700 and is only ever used as a test oracle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly, GCD_COEFF_TOL};
use crate::rel_scale;

/// Relative tolerance for deciding that a denominator vanishes, measured
/// against the largest monomial term at the evaluation point. Absolute
/// epsilons fail across the dynamic range of polynomial evaluation.
pub const ZERO_REL_TOL: f64 = 1e-12;

const MAX_EXPONENT: f64 = 709.0; // ln(f64::MAX) ~ 709.78
const MIN_EXPONENT: f64 = -745.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalStatus {
    Finite,
    /// `f'(z) = 0` while `f(z) != 0`: a pole of the Newton map.
    PoleOfNewton,
    /// True magnitude exceeds the representable range.
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub status: EvalStatus,
}

impl EvalResult {
    pub fn finite(value: Complex64) -> Self {
        EvalResult {
            value,
            status: EvalStatus::Finite,
        }
    }

    pub fn pole() -> Self {
        EvalResult {
            value: Complex64::new(f64::INFINITY, f64::INFINITY),
            status: EvalStatus::PoleOfNewton,
        }
    }

    pub fn overflow() -> Self {
        EvalResult {
            value: Complex64::new(f64::INFINITY, f64::INFINITY),
            status: EvalStatus::Overflow,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.status == EvalStatus::Finite
    }

    /// The value if finite, None otherwise.
    pub fn ok(&self) -> Option<Complex64> {
        self.is_finite().then_some(self.value)
    }
}

/// A map of the plane with possible poles/overflow, plus a derivative that
/// defaults to central finite differences with step `1e-6 * max(1, |z|)`.
pub trait ComplexMap {
    fn eval(&self, z: Complex64) -> EvalResult;

    fn derivative(&self, z: Complex64) -> EvalResult {
        let h = 1e-6 * rel_scale(z);
        let hp = Complex64::new(h, 0.0);
        match (self.eval(z + hp), self.eval(z - hp)) {
            (a, b) if a.is_finite() && b.is_finite() => {
                EvalResult::finite((a.value - b.value) / (2.0 * h))
            }
            (a, b) => {
                if a.status == EvalStatus::PoleOfNewton || b.status == EvalStatus::PoleOfNewton {
                    EvalResult::pole()
                } else {
                    EvalResult::overflow()
                }
            }
        }
    }
}

/// Total functions given as plain closures.
impl<F> ComplexMap for F
where
    F: Fn(Complex64) -> Complex64,
{
    fn eval(&self, z: Complex64) -> EvalResult {
        EvalResult::finite(self(z))
    }
}

/// View of a function spec as its Newton map.
pub struct NewtonOf<'a>(pub &'a FunctionSpec);

impl ComplexMap for NewtonOf<'_> {
    fn eval(&self, z: Complex64) -> EvalResult {
        self.0.newton(z)
    }

    fn derivative(&self, z: Complex64) -> EvalResult {
        self.0.newton_derivative(z)
    }
}

/// Axis-aligned rectangle in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(corner_a: Complex64, corner_b: Complex64) -> Self {
        Window {
            re_min: corner_a.re.min(corner_b.re),
            re_max: corner_a.re.max(corner_b.re),
            im_min: corner_a.im.min(corner_b.im),
            im_max: corner_a.im.max(corner_b.im),
        }
    }

    pub fn square(half_side: f64) -> Self {
        Window::new(
            Complex64::new(-half_side, -half_side),
            Complex64::new(half_side, half_side),
        )
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }
}

/// Registry of built-in transcendental functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    /// `f(z) = z * exp(exp(z))`; single root at 0, Newton map
    /// `z - z/(1 + z e^z)`.
    ZExpExpZ,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "z_exp_exp_z" => Some(Builtin::ZExpExpZ),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::ZExpExpZ => "z_exp_exp_z",
        }
    }

    /// Roots with multiplicity (finitely many for the registered functions).
    pub fn roots(&self) -> Vec<(Complex64, usize)> {
        match self {
            Builtin::ZExpExpZ => vec![(Complex64::new(0.0, 0.0), 1)],
        }
    }
}

/// An entire function in one of the supported representations.
///
/// Immutable after construction; the polynomial variants precompute the
/// Newton-map ratio `f/f' = num/den` with any common factor of numerator and
/// denominator cancelled (multiple roots), so the map extends holomorphically
/// across them.
#[derive(Debug, Clone)]
pub enum FunctionSpec {
    Polynomial(PolyParts),
    PolyExpPoly(PolyExpParts),
    Builtin(Builtin),
}

#[derive(Debug, Clone)]
pub struct PolyParts {
    pub p: Poly,
    ratio: ReducedRatio,
}

#[derive(Debug, Clone)]
pub struct PolyExpParts {
    pub p: Poly,
    pub q: Poly,
    /// `p' + q' p`, the denominator of `f/f'` before reduction.
    pub newton_den_raw: Poly,
    ratio: ReducedRatio,
}

/// `num/den` in lowest terms (approximately), with derivative polynomials for
/// the closed-form Newton derivative `N' = 1 - (num' den - num den')/den^2`.
#[derive(Debug, Clone)]
struct ReducedRatio {
    num: Poly,
    den: Poly,
    num_d: Poly,
    den_d: Poly,
}

impl ReducedRatio {
    fn new(num_raw: &Poly, den_raw: &Poly) -> Self {
        let g = num_raw.gcd_approx(den_raw, GCD_COEFF_TOL);
        let (num, den) = if g.degree().unwrap_or(0) >= 1 {
            (num_raw.div_rem(&g).0, den_raw.div_rem(&g).0)
        } else {
            (num_raw.clone(), den_raw.clone())
        };
        let num_d = num.derivative();
        let den_d = den.derivative();
        ReducedRatio {
            num,
            den,
            num_d,
            den_d,
        }
    }

    /// `num(z)/den(z)` with pole detection on the reduced denominator.
    fn eval(&self, z: Complex64) -> EvalResult {
        let den_zero = self.den.vanishes_at(z, ZERO_REL_TOL);
        if den_zero {
            if self.num.vanishes_at(z, ZERO_REL_TOL) {
                // Residual common zero that survived the approximate GCD:
                // take a limiting value from four nearby points.
                let h = 1e-6 * rel_scale(z);
                let mut acc = Complex64::new(0.0, 0.0);
                for dir in [
                    Complex64::new(h, 0.0),
                    Complex64::new(-h, 0.0),
                    Complex64::new(0.0, h),
                    Complex64::new(0.0, -h),
                ] {
                    acc += self.num.eval(z + dir) / self.den.eval(z + dir);
                }
                return EvalResult::finite(acc / 4.0);
            }
            return EvalResult::pole();
        }
        let v = self.num.eval(z) / self.den.eval(z);
        if v.is_finite() {
            EvalResult::finite(v)
        } else {
            EvalResult::overflow()
        }
    }

    /// Derivative of `num/den`.
    fn eval_derivative(&self, z: Complex64) -> EvalResult {
        if self.den.vanishes_at(z, ZERO_REL_TOL) {
            return EvalResult::pole();
        }
        let den = self.den.eval(z);
        let v = (self.num_d.eval(z) * den - self.num.eval(z) * self.den_d.eval(z)) / (den * den);
        if v.is_finite() {
            EvalResult::finite(v)
        } else {
            EvalResult::overflow()
        }
    }
}

impl FunctionSpec {
    /// Polynomial from ascending coefficients. Trailing exact zeros are
    /// dropped; the result must have degree >= 1.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        let p = Poly::new(coeffs);
        match p.degree() {
            Some(d) if d >= 1 => {}
            _ => {
                return Err(Error::InvalidSpec(
                    "polynomial must have degree >= 1 with nonzero leading coefficient".into(),
                ))
            }
        }
        let ratio = ReducedRatio::new(&p, &p.derivative());
        Ok(FunctionSpec::Polynomial(PolyParts { p, ratio }))
    }

    /// `f = p * exp(q)`. `p` must not be identically zero.
    pub fn poly_exp_poly(p_coeffs: Vec<Complex64>, q_coeffs: Vec<Complex64>) -> Result<Self> {
        let p = Poly::new(p_coeffs);
        if p.is_zero() {
            return Err(Error::InvalidSpec(
                "p in p*exp(q) must not be identically zero".into(),
            ));
        }
        let q = Poly::new(q_coeffs);
        let newton_den_raw = p.derivative().add(&q.derivative().mul(&p));
        if newton_den_raw.is_zero() {
            return Err(Error::InvalidSpec(
                "p' + q'p vanishes identically; Newton map undefined".into(),
            ));
        }
        let ratio = ReducedRatio::new(&p, &newton_den_raw);
        Ok(FunctionSpec::PolyExpPoly(PolyExpParts {
            p,
            q,
            newton_den_raw,
            ratio,
        }))
    }

    /// Built-in by registry name; unknown names are rejected.
    pub fn builtin(name: &str) -> Result<Self> {
        Builtin::from_name(name)
            .map(FunctionSpec::Builtin)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown builtin function '{name}'")))
    }

    pub fn describe(&self) -> String {
        match self {
            FunctionSpec::Polynomial(parts) => {
                format!("polynomial of degree {}", parts.p.degree().unwrap())
            }
            FunctionSpec::PolyExpPoly(parts) => format!(
                "p*exp(q) with deg p = {}, deg q = {}",
                parts.p.degree().unwrap(),
                parts.q.degree().unwrap_or(0)
            ),
            FunctionSpec::Builtin(b) => format!("builtin '{}'", b.name()),
        }
    }

    /// The polynomial whose zeros are the roots of `f`, when there is one.
    pub fn root_polynomial(&self) -> Option<&Poly> {
        match self {
            FunctionSpec::Polynomial(parts) => Some(&parts.p),
            FunctionSpec::PolyExpPoly(parts) => Some(&parts.p),
            FunctionSpec::Builtin(_) => None,
        }
    }

    /// `f(z)`. Overflow is detected from the real part of the exponent, not
    /// by computing the exponential.
    pub fn eval(&self, z: Complex64) -> EvalResult {
        match self {
            FunctionSpec::Polynomial(parts) => {
                let v = parts.p.eval(z);
                if v.is_finite() {
                    EvalResult::finite(v)
                } else {
                    EvalResult::overflow()
                }
            }
            FunctionSpec::PolyExpPoly(parts) => {
                let pv = parts.p.eval(z);
                if pv.norm() == 0.0 {
                    return EvalResult::finite(Complex64::new(0.0, 0.0));
                }
                let qv = parts.q.eval(z);
                let log_mag = pv.norm().ln() + qv.re;
                if log_mag > MAX_EXPONENT {
                    EvalResult::overflow()
                } else if log_mag < MIN_EXPONENT {
                    EvalResult::finite(Complex64::new(0.0, 0.0))
                } else {
                    EvalResult::finite((qv + pv.ln()).exp())
                }
            }
            FunctionSpec::Builtin(Builtin::ZExpExpZ) => {
                if z.norm() == 0.0 {
                    return EvalResult::finite(Complex64::new(0.0, 0.0));
                }
                // |f| = |z| * exp(Re(e^z)); Re(e^z) = e^{Re z} cos(Im z).
                if z.re > MAX_EXPONENT {
                    return if z.im.cos() > 0.0 {
                        EvalResult::overflow()
                    } else {
                        EvalResult::finite(Complex64::new(0.0, 0.0))
                    };
                }
                let u = z.exp();
                let log_mag = z.norm().ln() + u.re;
                if log_mag > MAX_EXPONENT {
                    EvalResult::overflow()
                } else if log_mag < MIN_EXPONENT {
                    EvalResult::finite(Complex64::new(0.0, 0.0))
                } else {
                    EvalResult::finite((u + z.ln()).exp())
                }
            }
        }
    }

    /// `N(z) = z - f(z)/f'(z)` in simplified form.
    pub fn newton(&self, z: Complex64) -> EvalResult {
        match self {
            FunctionSpec::Polynomial(PolyParts { ratio, .. })
            | FunctionSpec::PolyExpPoly(PolyExpParts { ratio, .. }) => {
                let step = ratio.eval(z);
                if step.is_finite() {
                    let v = z - step.value;
                    if v.is_finite() {
                        EvalResult::finite(v)
                    } else {
                        EvalResult::overflow()
                    }
                } else {
                    step
                }
            }
            FunctionSpec::Builtin(Builtin::ZExpExpZ) => {
                // N(z) = z - z/(1 + w), w = z e^z.
                if z.norm() == 0.0 {
                    return EvalResult::finite(z);
                }
                let log_w = z.norm().ln() + z.re;
                if log_w > 300.0 {
                    // 1 + w ~ w: N = z - 1/e^z, with exp(-z) underflowing to 0
                    // for very large Re z.
                    let v = z - (-z).exp();
                    return if v.is_finite() {
                        EvalResult::finite(v)
                    } else {
                        EvalResult::overflow()
                    };
                }
                let w = z * z.exp();
                let denom = Complex64::new(1.0, 0.0) + w;
                if denom.norm() <= ZERO_REL_TOL * w.norm().max(1.0) {
                    return EvalResult::pole();
                }
                let v = z - z / denom;
                if v.is_finite() {
                    EvalResult::finite(v)
                } else {
                    EvalResult::overflow()
                }
            }
        }
    }

    /// `N'(z)`, from the closed form `f f'' / (f')^2` evaluated through the
    /// reduced rational representation (polynomial variants) or the
    /// exponential-free form for built-ins.
    pub fn newton_derivative(&self, z: Complex64) -> EvalResult {
        match self {
            FunctionSpec::Polynomial(PolyParts { ratio, .. })
            | FunctionSpec::PolyExpPoly(PolyExpParts { ratio, .. }) => {
                // N = z - num/den, so N' = 1 - (num/den)'.
                let d = ratio.eval_derivative(z);
                if d.is_finite() {
                    EvalResult::finite(Complex64::new(1.0, 0.0) - d.value)
                } else {
                    d
                }
            }
            FunctionSpec::Builtin(Builtin::ZExpExpZ) => {
                // N' = w (2 + z + w) / (1 + w)^2, w = z e^z.
                if z.norm() == 0.0 {
                    return EvalResult::finite(Complex64::new(0.0, 0.0));
                }
                let log_w = z.norm().ln() + z.re;
                if log_w > 300.0 {
                    let v = Complex64::new(1.0, 0.0) + (-z).exp();
                    return EvalResult::finite(v);
                }
                let w = z * z.exp();
                let denom = Complex64::new(1.0, 0.0) + w;
                if denom.norm() <= ZERO_REL_TOL * w.norm().max(1.0) {
                    return EvalResult::pole();
                }
                let v = w * (Complex64::new(2.0, 0.0) + z + w) / (denom * denom);
                if v.is_finite() {
                    EvalResult::finite(v)
                } else {
                    EvalResult::overflow()
                }
            }
        }
    }

    /// Poles of the Newton map inside `window`, with multiplicity: zeros of
    /// the reduced denominator of `f/f'`. Unsupported for built-ins, whose
    /// pole sets are infinite.
    pub fn newton_poles_in(&self, window: &Window) -> Result<Vec<(Complex64, usize)>> {
        let ratio = match self {
            FunctionSpec::Polynomial(parts) => &parts.ratio,
            FunctionSpec::PolyExpPoly(parts) => &parts.ratio,
            FunctionSpec::Builtin(_) => return Err(Error::Unsupported("pole enumeration")),
        };
        let raw = ratio.den.roots()?;
        let clustered = crate::poly::cluster_roots(&raw, 1e-7);
        Ok(clustered
            .into_iter()
            .filter(|(z, _)| window.contains(*z) && !ratio.num.vanishes_at(*z, 1e-8))
            .collect())
    }

    /// All poles of the Newton map (rational variants only).
    pub fn newton_poles(&self) -> Result<Vec<(Complex64, usize)>> {
        self.newton_poles_in(&Window::square(f64::INFINITY))
    }

    /// Numerator/denominator pair of the rational Newton map
    /// `N = (z den - num)/den`; None for built-ins.
    pub fn newton_pair(&self) -> Option<(Poly, Poly)> {
        let ratio = match self {
            FunctionSpec::Polynomial(parts) => &parts.ratio,
            FunctionSpec::PolyExpPoly(parts) => &parts.ratio,
            FunctionSpec::Builtin(_) => return None,
        };
        let num = ratio.den.shift_up(1).sub(&ratio.num);
        Some((num, ratio.den.clone()))
    }

    /// Known roots for variants where they are part of the registry (the
    /// built-ins); polynomial variants find theirs numerically.
    pub fn registry_roots(&self) -> Option<Vec<(Complex64, usize)>> {
        match self {
            FunctionSpec::Builtin(b) => Some(b.roots()),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Human-readable key-value document (TOML) for function specs. This is the
// input format of every CLI subcommand.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct RawSpecDoc {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    coeffs: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_coeffs: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_coeffs: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

fn to_complex(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

fn to_pairs(coeffs: &[Complex64]) -> Vec<[f64; 2]> {
    coeffs.iter().map(|c| [c.re, c.im]).collect()
}

impl FunctionSpec {
    /// Parse the key-value document: `kind` is one of `poly`,
    /// `poly_exp_poly`, `builtin`; coefficient lists are `[re, im]` pairs in
    /// ascending degree order; built-ins carry `name`.
    pub fn from_toml_str(doc: &str) -> Result<Self> {
        let raw: RawSpecDoc =
            toml::from_str(doc).map_err(|e| Error::InvalidSpec(format!("parse error: {e}")))?;
        match raw.kind.as_str() {
            "poly" => {
                let coeffs = raw
                    .coeffs
                    .ok_or_else(|| Error::InvalidSpec("kind 'poly' requires 'coeffs'".into()))?;
                FunctionSpec::polynomial(to_complex(&coeffs))
            }
            "poly_exp_poly" => {
                let p = raw.p_coeffs.ok_or_else(|| {
                    Error::InvalidSpec("kind 'poly_exp_poly' requires 'p_coeffs'".into())
                })?;
                let q = raw.q_coeffs.unwrap_or_default();
                FunctionSpec::poly_exp_poly(to_complex(&p), to_complex(&q))
            }
            "builtin" => {
                let name = raw
                    .name
                    .ok_or_else(|| Error::InvalidSpec("kind 'builtin' requires 'name'".into()))?;
                FunctionSpec::builtin(&name)
            }
            other => Err(Error::InvalidSpec(format!(
                "unknown kind '{other}' (expected poly, poly_exp_poly, or builtin)"
            ))),
        }
    }

    pub fn to_toml_string(&self) -> String {
        let raw = match self {
            FunctionSpec::Polynomial(parts) => RawSpecDoc {
                kind: "poly".into(),
                coeffs: Some(to_pairs(parts.p.coeffs())),
                p_coeffs: None,
                q_coeffs: None,
                name: None,
            },
            FunctionSpec::PolyExpPoly(parts) => RawSpecDoc {
                kind: "poly_exp_poly".into(),
                coeffs: None,
                p_coeffs: Some(to_pairs(parts.p.coeffs())),
                q_coeffs: Some(to_pairs(parts.q.coeffs())),
                name: None,
            },
            FunctionSpec::Builtin(b) => RawSpecDoc {
                kind: "builtin".into(),
                coeffs: None,
                p_coeffs: None,
                q_coeffs: None,
                name: Some(b.name().into()),
            },
        };
        toml::to_string(&raw).expect("spec serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[f64]) -> FunctionSpec {
        FunctionSpec::polynomial(coeffs.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
    }

    #[test]
    fn eval_polynomial() {
        let f = poly(&[-1.0, 0.0, 1.0]); // z^2 - 1
        assert_eq!(f.eval(c(2.0, 0.0)).ok(), Some(c(3.0, 0.0)));
        assert_eq!(f.eval(c(1.0, 0.0)).ok(), Some(c(0.0, 0.0)));
    }

    #[test]
    fn builtin_vanishes_at_origin() {
        let f = FunctionSpec::builtin("z_exp_exp_z").unwrap();
        assert_eq!(f.eval(c(0.0, 0.0)).ok(), Some(c(0.0, 0.0)));
    }

    #[test]
    fn unknown_builtin_rejected() {
        assert!(FunctionSpec::builtin("z_sin_z").is_err());
    }

    #[test]
    fn degenerate_polynomials_rejected() {
        assert!(FunctionSpec::polynomial(vec![c(3.0, 0.0)]).is_err());
        assert!(FunctionSpec::polynomial(vec![]).is_err());
        assert!(FunctionSpec::poly_exp_poly(vec![], vec![c(0.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn newton_of_quadratic() {
        // N(z) = (z^2 + 1)/(2z) for z^2 - 1: N(2) = 5/4.
        let f = poly(&[-1.0, 0.0, 1.0]);
        let n = f.newton(c(2.0, 0.0));
        assert!((n.value - c(1.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn newton_of_pure_power_is_linear_contraction() {
        // f = z^3: N(z) = 2z/3, so N(3) = 2 and N' = 2/3 everywhere.
        let f = poly(&[0.0, 0.0, 0.0, 1.0]);
        assert!((f.newton(c(3.0, 0.0)).value - c(2.0, 0.0)).norm() < 1e-14);
        for z in [c(0.7, 0.1), c(-2.0, 3.0), c(100.0, -5.0)] {
            let d = f.newton_derivative(z);
            assert!((d.value - c(2.0 / 3.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn newton_derivative_vanishes_at_simple_root() {
        let f = poly(&[-1.0, 0.0, 1.0]);
        let d = f.newton_derivative(c(1.0, 0.0));
        assert!(d.value.norm() < 1e-14);
    }

    #[test]
    fn newton_derivative_at_double_root() {
        // f = (z-1)^2 (z+1): multiplier at the double root is 1/2.
        let p = crate::poly::Poly::from_roots(&[(c(1.0, 0.0), 2), (c(-1.0, 0.0), 1)], c(1.0, 0.0));
        let f = FunctionSpec::polynomial(p.coeffs().to_vec()).unwrap();
        let d = f.newton_derivative(c(1.0, 0.0));
        assert!(d.is_finite());
        assert!((d.value - c(0.5, 0.0)).norm() < 1e-10);
        // And the map itself extends across the double root: N(1) = 1.
        let n = f.newton(c(1.0, 0.0));
        assert!(n.is_finite());
        assert!((n.value - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn pole_of_newton_detected() {
        let f = poly(&[-1.0, 0.0, 1.0]); // f'(0) = 0, f(0) = -1
        assert_eq!(f.newton(c(0.0, 0.0)).status, EvalStatus::PoleOfNewton);
        // Slightly off the pole the map is huge but finite.
        let near = f.newton(c(1e-9, 0.0));
        assert!(near.is_finite());
        assert!(near.value.norm() > 1e6);
    }

    #[test]
    fn builtin_newton_increases_real_part_in_strip() {
        // On the line Im z = 3 pi the Newton map of z exp(exp(z)) pushes
        // rightward: Re N(z) > Re z.
        let f = FunctionSpec::builtin("z_exp_exp_z").unwrap();
        let z = c(2.0, 3.0 * std::f64::consts::PI);
        let n = f.newton(z).ok().unwrap();
        assert!(n.re > z.re);
        // High-precision oracle: the unsimplified form at moderate |z|.
        let w = z * z.exp();
        let oracle = z - z / (c(1.0, 0.0) + w);
        assert!((n - oracle).norm() < 1e-12 * oracle.norm());
    }

    #[test]
    fn builtin_newton_far_right_is_finite() {
        let f = FunctionSpec::builtin("z_exp_exp_z").unwrap();
        let z = c(500.0, std::f64::consts::PI);
        let n = f.newton(z);
        assert!(n.is_finite());
        assert!((n.value - z).norm() < 1e-100);
    }

    #[test]
    fn overflow_detected_without_computing_exponential() {
        let f = FunctionSpec::builtin("z_exp_exp_z").unwrap();
        // Re(e^z) = e^10 > 709 at z = 10: f overflows f64.
        assert_eq!(f.eval(c(10.0, 0.0)).status, EvalStatus::Overflow);
        // At z = 10 + i*pi, Re(e^z) = -e^10: f underflows to zero instead.
        let v = f.eval(c(10.0, std::f64::consts::PI));
        assert!(v.is_finite());
        assert!(v.value.norm() < 1e-300);
    }

    #[test]
    fn poly_exp_poly_newton_uses_exponential_free_form() {
        // f = z e^z: N = z - z/(1 + z), finite even where e^z overflows.
        let f = FunctionSpec::poly_exp_poly(
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let z = c(900.0, 0.0);
        let n = f.newton(z).ok().unwrap();
        let expected = z - z / (c(1.0, 0.0) + z);
        assert!((n - expected).norm() < 1e-10);
        assert_eq!(f.eval(z).status, EvalStatus::Overflow);
    }

    #[test]
    fn poles_of_quadratic_and_cubic() {
        let f = poly(&[-1.0, 0.0, 1.0]);
        let poles = f.newton_poles_in(&Window::square(2.0)).unwrap();
        assert_eq!(poles.len(), 1);
        assert!((poles[0].0).norm() < 1e-12);
        assert_eq!(poles[0].1, 1);

        let f = poly(&[-1.0, 0.0, 0.0, 1.0]); // z^3 - 1, f' = 3z^2
        let poles = f.newton_poles_in(&Window::square(2.0)).unwrap();
        assert_eq!(poles.len(), 1);
        assert_eq!(poles[0].1, 2);
    }

    #[test]
    fn poles_of_poly_exp_poly() {
        // p = z, q = z: zeros of p' + q'p = 1 + z.
        let f = FunctionSpec::poly_exp_poly(
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let poles = f.newton_poles_in(&Window::square(2.0)).unwrap();
        assert_eq!(poles.len(), 1);
        assert!((poles[0].0 - c(-1.0, 0.0)).norm() < 1e-12);
        // Built-in pole enumeration is refused.
        let b = FunctionSpec::builtin("z_exp_exp_z").unwrap();
        assert!(b.newton_poles_in(&Window::square(2.0)).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let doc = r#"
kind = "poly"
coeffs = [[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
"#;
        let f = FunctionSpec::from_toml_str(doc).unwrap();
        assert!((f.newton(c(2.0, 0.0)).value - c(1.25, 0.0)).norm() < 1e-15);
        let round = FunctionSpec::from_toml_str(&f.to_toml_string()).unwrap();
        assert!((round.newton(c(2.0, 0.0)).value - c(1.25, 0.0)).norm() < 1e-15);

        let doc = r#"
kind = "builtin"
name = "z_exp_exp_z"
"#;
        assert!(FunctionSpec::from_toml_str(doc).is_ok());
        assert!(FunctionSpec::from_toml_str("kind = \"poly\"").is_err());
    }

    #[test]
    fn scaling_leaves_newton_map_unchanged() {
        let p: Vec<Complex64> = vec![c(-1.0, 0.5), c(2.0, 0.0), c(0.3, -0.4), c(1.0, 1.0)];
        let f = FunctionSpec::polynomial(p.clone()).unwrap();
        let scaled =
            FunctionSpec::polynomial(p.iter().map(|&a| a * c(-3.7, 1.9)).collect()).unwrap();
        for z in [c(1.3, 0.2), c(-0.4, 1.1), c(5.0, -2.0)] {
            let a = f.newton(z).ok().unwrap();
            let b = scaled.newton(z).ok().unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }
}
