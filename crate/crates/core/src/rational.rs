//! Rational maps as numerator/denominator polynomial pairs.
//!
//! Newton maps of polynomials (and of the `p * exp(q)` family) are rational;
//! the preimage tracing and fixed-point counting of the winding-number
//! calculus work on this representation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function::{ComplexMap, EvalResult, FunctionSpec};
use crate::poly::{cluster_roots, Poly, GCD_COEFF_TOL};

#[derive(Debug, Clone)]
pub struct RationalMap {
    num: Poly,
    den: Poly,
}

impl RationalMap {
    /// Construct from raw numerator/denominator coefficients; any common
    /// factor is cancelled.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidSpec("denominator is identically zero".into()));
        }
        if num.is_zero() {
            return Ok(RationalMap {
                num: Poly::zero(),
                den: Poly::constant(Complex64::new(1.0, 0.0)),
            });
        }
        let g = num.gcd_approx(&den, GCD_COEFF_TOL);
        let (num, den) = if g.degree().unwrap_or(0) >= 1 {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        } else {
            (num, den)
        };
        Ok(RationalMap { num, den })
    }

    /// The Newton map `N = (z den - num)/den` of a polynomial or
    /// `p * exp(q)` spec, already in reduced form.
    pub fn newton_of(spec: &FunctionSpec) -> Result<Self> {
        let (num, den) = spec
            .newton_pair()
            .ok_or(Error::Unsupported("rational Newton map"))?;
        Ok(RationalMap { num, den })
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    /// Algebraic degree: number of preimages of a generic point.
    pub fn degree(&self) -> usize {
        self.num
            .degree()
            .unwrap_or(0)
            .max(self.den.degree().unwrap_or(0))
    }

    /// Finite poles with multiplicity.
    pub fn poles(&self) -> Result<Vec<(Complex64, usize)>> {
        if self.den.degree().unwrap_or(0) == 0 {
            return Ok(vec![]);
        }
        Ok(cluster_roots(&self.den.roots()?, 1e-7))
    }

    /// Fixed points in the plane, with multiplicity: roots of
    /// `z den(z) - num(z)`.
    pub fn fixed_points(&self) -> Result<Vec<(Complex64, usize)>> {
        let p = self.den.shift_up(1).sub(&self.num);
        if p.degree().unwrap_or(0) == 0 {
            return Ok(vec![]);
        }
        Ok(cluster_roots(&p.roots()?, 1e-7))
    }

    /// Finite critical values (images of zeros of the derivative). The value
    /// of a pole is skipped; if the map has local degree >= 2 at infinity
    /// with a finite value there, that value is included.
    pub fn critical_values(&self) -> Result<Vec<Complex64>> {
        let wronskian = self
            .num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()));
        let mut values = Vec::new();
        if wronskian.degree().unwrap_or(0) >= 1 {
            for (z, _) in cluster_roots(&wronskian.roots()?, 1e-7) {
                if let Some(v) = self.eval(z).ok() {
                    values.push(v);
                }
            }
        }
        let dn = self.num.degree().unwrap_or(0);
        let dd = self.den.degree().unwrap_or(0);
        if dd >= dn + 2 {
            values.push(Complex64::new(0.0, 0.0)); // infinity maps to 0 with multiplicity
        }
        Ok(values)
    }

    /// Preimages of `w`: roots of `num - w den`, all `degree()` of them for
    /// generic `w`.
    pub fn preimages(&self, w: Complex64) -> Result<Vec<Complex64>> {
        let shifted = self.num.sub(&self.den.scale(w));
        if shifted.degree().unwrap_or(0) != self.degree() {
            return Err(Error::Continuation(format!(
                "a preimage of {w} escapes to infinity (degenerate leading coefficient)"
            )));
        }
        shifted.roots()
    }
}

impl ComplexMap for RationalMap {
    fn eval(&self, z: Complex64) -> EvalResult {
        if self.den.vanishes_at(z, crate::function::ZERO_REL_TOL) {
            return EvalResult::pole();
        }
        let v = self.num.eval(z) / self.den.eval(z);
        if v.is_finite() {
            EvalResult::finite(v)
        } else {
            EvalResult::overflow()
        }
    }

    fn derivative(&self, z: Complex64) -> EvalResult {
        if self.den.vanishes_at(z, crate::function::ZERO_REL_TOL) {
            return EvalResult::pole();
        }
        let den = self.den.eval(z);
        let v = (self.num.derivative().eval(z) * den - self.num.eval(z) * self.den.derivative().eval(z))
            / (den * den);
        if v.is_finite() {
            EvalResult::finite(v)
        } else {
            EvalResult::overflow()
        }
    }
}
