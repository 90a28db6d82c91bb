use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::equation::expr::CoeffExpr;
use crate::error::{Error, Result};
use crate::numerics::{poly_roots, Polynomial, PowerSeries};
use crate::scalar::{to_pair, Cplx, Scalar};

/// A rational map `R(y) = num(y)/den(y)` with common roots cancelled.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap<T: Scalar> {
    num: Polynomial<T>,
    den: Polynomial<T>,
}

impl<T: Scalar> RationalMap<T> {
    /// Builds `num/den`, dividing out roots of `den` at which `num` also
    /// vanishes (to the clustering tolerance of the root finder).
    pub fn new(num: Polynomial<T>, den: Polynomial<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Invalid("denominator is identically zero".into()));
        }
        let (mut num, mut den) = (num, den);
        if den.degree() >= 1 && !num.is_zero() {
            let tol = T::tol_floor();
            for r in poly_roots(&den, tol)? {
                let scale = num.coeffs().iter().fold(T::zero(), |m, c| m.max(c.norm()));
                let reach = T::one().max(r.value.norm()).powi(num.degree() as i32);
                for _ in 0..r.multiplicity {
                    if num.degree() == 0 || num.eval(r.value).norm() > tol * scale * reach {
                        break;
                    }
                    num = deflate(&num, r.value);
                    den = deflate(&den, r.value);
                }
            }
        }
        // Normalize so the denominator's leading coefficient is one.
        let lead = den.leading();
        let inv = Complex::<T>::one() / lead;
        Ok(RationalMap {
            num: num.mul_scalar(inv),
            den: den.mul_scalar(inv),
        })
    }

    /// Parses a rational expression in `y`, e.g. `"y/(1+y)"`.
    pub fn parse(src: &str) -> Result<Self> {
        let e = CoeffExpr::<T>::parse_in(src, 'y')?;
        let (p, q) = e.to_rational()?;
        Self::new(p, q)
    }

    pub fn polynomial(p: Polynomial<T>) -> Self {
        RationalMap {
            num: p,
            den: Polynomial::constant(Complex::one()),
        }
    }

    pub fn num(&self) -> &Polynomial<T> {
        &self.num
    }

    pub fn den(&self) -> &Polynomial<T> {
        &self.den
    }

    /// `max(deg num, deg den)`.
    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    pub fn eval(&self, y: Cplx<T>) -> Result<Cplx<T>> {
        let d = self.den.eval(y);
        if d.is_zero() {
            return Err(Error::Pole { at: to_pair(y) });
        }
        Ok(self.num.eval(y) / d)
    }

    /// Taylor expansion of `R` at `y0` with `order` terms.
    pub fn taylor(&self, y0: Cplx<T>, order: usize) -> Result<PowerSeries<T>> {
        let n = self.num.to_series(y0, order);
        let d = self.den.to_series(y0, order);
        if d.scaled_coeff(0).is_zero() {
            return Err(Error::Pole { at: to_pair(y0) });
        }
        n.mul(&d.recip()?)
    }

    /// `R'(y)` from the Taylor expansion.
    pub fn derivative(&self, y: Cplx<T>) -> Result<Cplx<T>> {
        Ok(self.taylor(y, 2)?.coeff(1))
    }
}

/// Synthetic division by `(y − r)`, dropping the remainder.
fn deflate<T: Scalar>(p: &Polynomial<T>, r: Cplx<T>) -> Polynomial<T> {
    let c = p.coeffs();
    let n = c.len();
    let mut q = vec![Complex::zero(); n - 1];
    let mut acc = Complex::zero();
    for k in (1..n).rev() {
        acc = acc * r + c[k];
        q[k - 1] = acc;
    }
    Polynomial::new(q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum FixedPointClass {
    Expanding,
    Contracting,
    Parabolic,
    Superattracting,
    Neutral,
}

impl FixedPointClass {
    pub fn of<T: Scalar>(multiplier: Cplx<T>, tol: T) -> Self {
        let a = multiplier.norm();
        if (multiplier - Complex::one()).norm() <= tol {
            FixedPointClass::Parabolic
        } else if a <= tol {
            FixedPointClass::Superattracting
        } else if a > T::one() + tol {
            FixedPointClass::Expanding
        } else if a < T::one() - tol {
            FixedPointClass::Contracting
        } else {
            FixedPointClass::Neutral
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointReport<T: Scalar> {
    pub gamma: Cplx<T>,
    pub multiplier: Cplx<T>,
    pub class: FixedPointClass,
    /// Multiplicity of `γ` as a root of `R(y) − y`.
    pub multiplicity: usize,
}

/// All finite fixed points plus the fixed point at infinity when `R(∞) = ∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointSummary<T: Scalar> {
    pub points: Vec<FixedPointReport<T>>,
    /// Multiplier at `∞` (in the chart `u = 1/y`), when `∞` is fixed.
    pub infinity: Option<Cplx<T>>,
    /// Some fixed point, finite or at `∞`, has `|multiplier| > 1` or
    /// multiplier `1`. Always expected when `deg R ≥ 2`.
    pub julia_witness: bool,
}

/// Fixed points of `R` from the roots of `num(y) − y·den(y)`.
pub fn fixed_points<T: Scalar>(r: &RationalMap<T>, tol: T) -> Result<FixedPointSummary<T>> {
    let p = r.num.sub(&r.den.mul(&Polynomial::var()));
    let mut points = Vec::new();
    if !p.is_zero() && p.degree() >= 1 {
        for root in poly_roots(&p, tol)? {
            let multiplier = r.derivative(root.value)?;
            points.push(FixedPointReport {
                gamma: root.value,
                multiplier,
                class: FixedPointClass::of(multiplier, tol.sqrt()),
                multiplicity: root.multiplicity,
            });
        }
    }
    let (dn, dd) = (r.num.degree(), r.den.degree());
    let infinity = if r.num.is_zero() || dn <= dd {
        None
    } else if dn == dd + 1 {
        Some(r.den.leading() / r.num.leading())
    } else {
        Some(Complex::zero())
    };
    let repelling_or_parabolic = |m: Cplx<T>| {
        matches!(
            FixedPointClass::of(m, tol.sqrt()),
            FixedPointClass::Expanding | FixedPointClass::Parabolic
        )
    };
    let julia_witness = points.iter().any(|f| repelling_or_parabolic(f.multiplier))
        || infinity.is_some_and(repelling_or_parabolic);
    Ok(FixedPointSummary {
        points,
        infinity,
        julia_witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn map(src: &str) -> RationalMap<f64> {
        RationalMap::parse(src).unwrap()
    }

    #[test]
    fn model_map_fixed_points() {
        let s = fixed_points(&map("0.5*y + y^2"), 1e-12).unwrap();
        assert_eq!(s.points.len(), 2);
        assert!(s.points[0].gamma.norm() < 1e-14);
        assert!((s.points[0].multiplier - cx(0.5, 0.0)).norm() < 1e-13);
        assert_eq!(s.points[0].class, FixedPointClass::Contracting);
        assert!((s.points[1].gamma - cx(0.5, 0.0)).norm() < 1e-13);
        assert!((s.points[1].multiplier - cx(1.5, 0.0)).norm() < 1e-13);
        assert_eq!(s.points[1].class, FixedPointClass::Expanding);
        assert!(s.julia_witness);
    }

    #[test]
    fn parabolic_double_fixed_point() {
        let s = fixed_points(&map("y/(1+y)"), 1e-12).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].multiplicity, 2);
        assert!(s.points[0].gamma.norm() < 1e-8);
        assert_eq!(s.points[0].class, FixedPointClass::Parabolic);
        assert_eq!(s.infinity, None);
    }

    #[test]
    fn linear_and_quadratic_cases() {
        let s = fixed_points(&map("2*y"), 1e-12).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].class, FixedPointClass::Expanding);
        assert!((s.points[0].multiplier - cx(2.0, 0.0)).norm() < 1e-14);
        let s = fixed_points(&map("2*y+y^2"), 1e-12).unwrap();
        let got: Vec<_> = s
            .points
            .iter()
            .map(|f| (to_pair(f.gamma), to_pair(f.multiplier)))
            .collect();
        assert!((got[0].0 .0 + 1.0).abs() < 1e-14 && got[0].1 .0.abs() < 1e-13);
        assert!(got[1].0 .0.abs() < 1e-14 && (got[1].1 .0 - 2.0).abs() < 1e-13);
    }

    #[test]
    fn infinity_carries_the_witness_when_needed() {
        // 1/R(1/u) = u/(1 + u + u²·(1/4)) style maps: here R(y) = (y² + 1)/(2y)
        // has finite fixed points ±1 with multiplier 0 and ∞ with multiplier 2.
        let s = fixed_points(&map("(y^2+1)/(2*y)"), 1e-12).unwrap();
        assert!(s
            .points
            .iter()
            .all(|f| f.class == FixedPointClass::Superattracting));
        assert!((s.infinity.unwrap() - cx(2.0, 0.0)).norm() < 1e-14);
        assert!(s.julia_witness);
    }

    #[test]
    fn common_factors_cancel() {
        let r = map("(y^2-1)/(y-1)");
        assert_eq!(r.den().degree(), 0);
        assert_eq!(r.num().degree(), 1);
        assert!((r.eval(cx(2.0, 0.0)).unwrap() - cx(3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn pole_is_reported() {
        assert!(matches!(
            map("y/(1+y)").eval(cx(-1.0, 0.0)),
            Err(Error::Pole { .. })
        ));
    }
}
