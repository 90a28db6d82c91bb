use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{to_pair, Cplx, Scalar};

/// Bound on the truncation remainder, valid for `|w − center| < radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBound<T> {
    pub bound: T,
    pub radius: T,
}

/// Truncated Taylor or Laurent series
/// `Σ_{n=minDegree}^{order-1} a_n ((w − center)/scale)^n`.
///
/// Coefficients are stored in the scaled variable `t = (w − center)/scale`.
/// With `scale = 1` this is the ordinary series; a scale near the radius of
/// convergence keeps stored coefficients of order one even when the true
/// coefficients overflow the exponent range of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<T: Scalar> {
    center: Cplx<T>,
    scale: T,
    min_degree: i32,
    coeffs: Vec<Cplx<T>>,
    tail: Option<TailBound<T>>,
}

impl<T: Scalar> PowerSeries<T> {
    /// Series around `center` whose `k`-th coefficient multiplies `(w − center)^(min_degree + k)`.
    pub fn new(center: Cplx<T>, min_degree: i32, coeffs: Vec<Cplx<T>>) -> Self {
        Self::with_scale(center, T::one(), min_degree, coeffs)
    }

    /// Series in the scaled variable `(w − center)/scale`.
    pub fn with_scale(center: Cplx<T>, scale: T, min_degree: i32, coeffs: Vec<Cplx<T>>) -> Self {
        assert!(scale > T::zero(), "series scale must be positive");
        PowerSeries {
            center,
            scale,
            min_degree,
            coeffs,
            tail: None,
        }
    }

    /// Taylor series at 0 from ascending coefficients.
    pub fn taylor(coeffs: Vec<Cplx<T>>) -> Self {
        Self::new(Complex::zero(), 0, coeffs)
    }

    /// Taylor series at 0 from real `f64` coefficients.
    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::taylor(
            coeffs
                .iter()
                .map(|&c| Complex::new(T::of(c), T::zero()))
                .collect(),
        )
    }

    /// Constant `c` known to `order` terms.
    pub fn constant(c: Cplx<T>, order: usize) -> Self {
        let mut coeffs = vec![Complex::zero(); order.max(1)];
        coeffs[0] = c;
        Self::taylor(coeffs)
    }

    /// The identity series `w` at `center`, truncated at `order`.
    pub fn variable(center: Cplx<T>, order: usize) -> Self {
        let mut coeffs = vec![Complex::zero(); order.max(2)];
        coeffs[0] = center;
        coeffs[1] = Complex::one();
        Self::new(center, 0, coeffs)
    }

    pub fn center(&self) -> Cplx<T> {
        self.center
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn min_degree(&self) -> i32 {
        self.min_degree
    }

    /// Exclusive truncation degree.
    pub fn order(&self) -> i32 {
        self.min_degree + self.coeffs.len() as i32
    }

    /// Stored coefficients, in the scaled variable.
    pub fn scaled_coeffs(&self) -> &[Cplx<T>] {
        &self.coeffs
    }

    pub fn tail_bound(&self) -> Option<TailBound<T>> {
        self.tail
    }

    /// Attaches a remainder bound valid inside `radius`.
    pub fn with_tail_bound(mut self, bound: T, radius: T) -> Self {
        self.tail = Some(TailBound { bound, radius });
        self
    }

    /// Scaled coefficient of `t^n` (zero outside the stored range).
    pub fn scaled_coeff(&self, n: i32) -> Cplx<T> {
        if n < self.min_degree || n >= self.order() {
            return Complex::zero();
        }
        self.coeffs[(n - self.min_degree) as usize]
    }

    /// Coefficient of `(w − center)^n` in the unscaled variable.
    pub fn coeff(&self, n: i32) -> Cplx<T> {
        self.scaled_coeff(n) / self.scale.powi(n)
    }

    /// Re-expresses the series in the variable `(w − center)/scale`.
    pub fn rescaled(&self, scale: T) -> Self {
        let ratio = scale / self.scale;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| a * ratio.powi(self.min_degree + k as i32))
            .collect();
        PowerSeries {
            center: self.center,
            scale,
            min_degree: self.min_degree,
            coeffs,
            tail: self.tail,
        }
    }

    /// Evaluates the truncated sum. Fails outside the tail-bound radius when
    /// a bound is attached.
    pub fn eval(&self, w: Cplx<T>) -> Result<Cplx<T>> {
        let d = w - self.center;
        if let Some(tb) = self.tail {
            let dist = d.norm();
            if dist >= tb.radius {
                return Err(Error::OutsideDisk {
                    distance: dist.f64(),
                    radius: tb.radius.f64(),
                });
            }
        }
        if self.min_degree < 0 && d.is_zero() {
            return Err(Error::Singular {
                what: "Laurent pole".into(),
                at: to_pair(w),
            });
        }
        Ok(self.eval_unchecked(w))
    }

    /// Evaluates without the validity-radius check.
    pub fn eval_unchecked(&self, w: Cplx<T>) -> Cplx<T> {
        let t = (w - self.center) / self.scale;
        let mut acc = Complex::zero();
        for &a in self.coeffs.iter().rev() {
            acc = acc * t + a;
        }
        if self.min_degree != 0 {
            acc *= crate::scalar::powi(t, self.min_degree);
        }
        acc
    }

    /// Derivative of the truncated sum.
    pub fn eval_derivative(&self, w: Cplx<T>) -> Cplx<T> {
        let t = (w - self.center) / self.scale;
        let mut acc: Cplx<T> = Complex::zero();
        for (k, &a) in self.coeffs.iter().enumerate().rev() {
            let n = self.min_degree + k as i32;
            if n == 0 {
                continue;
            }
            acc += a * T::int(n as i64) * crate::scalar::powi(t, n - 1);
        }
        acc / self.scale
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.center != other.center || self.scale != other.scale {
            return Err(Error::CenterMismatch);
        }
        Ok(())
    }

    /// Coefficient-wise sum, truncated at the smaller order.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let lo = self.min_degree.min(other.min_degree);
        let hi = self.order().min(other.order());
        let coeffs = (lo..hi.max(lo))
            .map(|n| self.scaled_coeff(n) + other.scaled_coeff(n))
            .collect();
        Ok(PowerSeries {
            center: self.center,
            scale: self.scale,
            min_degree: lo,
            coeffs,
            tail: None,
        })
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|&a| -a).collect();
        PowerSeries {
            coeffs,
            tail: self.tail,
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Multiplies every coefficient by `k`.
    pub fn mul_scalar(&self, k: Cplx<T>) -> Self {
        let coeffs = self.coeffs.iter().map(|&a| a * k).collect();
        PowerSeries {
            coeffs,
            tail: None,
            ..self.clone()
        }
    }

    /// Cauchy product. For Taylor inputs the result is truncated at
    /// `min(order_a, order_b)`; for Laurent inputs at the largest degree
    /// determined by both factors.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let lo = self.min_degree + other.min_degree;
        let hi = (self.order() + other.min_degree).min(other.order() + self.min_degree);
        let len = (hi - lo).max(0) as usize;
        let mut coeffs = vec![Complex::zero(); len];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] += a * b;
            }
        }
        Ok(PowerSeries {
            center: self.center,
            scale: self.scale,
            min_degree: lo,
            coeffs,
            tail: None,
        })
    }

    /// Multiplicative inverse; the lowest stored coefficient must be nonzero.
    pub fn recip(&self) -> Result<Self> {
        let a0 = *self.coeffs.first().ok_or(Error::ZeroLeading)?;
        if a0.is_zero() {
            return Err(Error::ZeroLeading);
        }
        let len = self.coeffs.len();
        let inv0 = Complex::<T>::one() / a0;
        let mut r = vec![Complex::zero(); len];
        r[0] = inv0;
        for n in 1..len {
            let mut s: Cplx<T> = Complex::zero();
            for k in 1..=n {
                s += self.coeffs[k] * r[n - k];
            }
            r[n] = -s * inv0;
        }
        Ok(PowerSeries {
            center: self.center,
            scale: self.scale,
            min_degree: -self.min_degree,
            coeffs: r,
            tail: None,
        })
    }

    /// Non-negative integer power by repeated multiplication.
    pub fn powu(&self, n: u32) -> Result<Self> {
        let mut acc = PowerSeries {
            center: self.center,
            scale: self.scale,
            min_degree: 0,
            coeffs: {
                let mut c = vec![Complex::zero(); self.coeffs.len().max(1)];
                c[0] = Complex::one();
                c
            },
            tail: None,
        };
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Composition `outer ∘ inner`. The inner series must take the value
    /// `outer.center` at its own center.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        if outer.min_degree < 0 || inner.min_degree < 0 {
            return Err(Error::Invalid("composition needs Taylor series".into()));
        }
        let c0 = inner.scaled_coeff(0) - outer.center;
        let mag = T::one().max(outer.center.norm());
        if c0.norm() > T::of(1e3) * T::epsilon() * mag {
            return Err(Error::NonzeroConstant);
        }
        let n_inner = inner.order().max(0) as usize;
        let mut d: Vec<Cplx<T>> = (0..n_inner)
            .map(|n| inner.scaled_coeff(n as i32) / outer.scale)
            .collect();
        if let Some(first) = d.first_mut() {
            *first = Complex::zero();
        }
        let valuation = d.iter().position(|a| !a.is_zero());
        let order = match valuation {
            Some(v) => n_inner.min(outer.order() as usize * v),
            None => n_inner,
        };
        d.truncate(order);
        let d = PowerSeries {
            center: inner.center,
            scale: inner.scale,
            min_degree: 0,
            coeffs: d,
            tail: None,
        };
        let mut acc = PowerSeries::constant_like(&d, Complex::zero(), order);
        for n in (0..outer.order().max(0)).rev() {
            acc = acc.mul(&d)?;
            acc.coeffs[0] += outer.scaled_coeff(n);
        }
        acc.coeffs.truncate(order);
        Ok(acc)
    }

    fn constant_like(model: &Self, c: Cplx<T>, order: usize) -> Self {
        let mut coeffs = vec![Complex::zero(); order.max(1)];
        coeffs[0] = c;
        PowerSeries {
            center: model.center,
            scale: model.scale,
            min_degree: 0,
            coeffs,
            tail: None,
        }
    }

    /// Drops coefficients at degree `order` and above.
    pub fn truncated(&self, order: i32) -> Self {
        let keep = (order - self.min_degree).clamp(0, self.coeffs.len() as i32) as usize;
        PowerSeries {
            coeffs: self.coeffs[..keep].to_vec(),
            tail: None,
            ..self.clone()
        }
    }

    /// JSON form `{center, minDegree, coeffs, order}` (plus `scale` when the
    /// true coefficients are not representable as `f64`).
    pub fn to_json(&self) -> SeriesJson {
        let unscaled: Vec<[f64; 2]> = (self.min_degree..self.order())
            .map(|n| {
                let (re, im) = to_pair(self.coeff(n));
                [re, im]
            })
            .collect();
        let finite = unscaled
            .iter()
            .all(|c| c[0].is_finite() && c[1].is_finite());
        let (coeffs, scale) = if finite || self.scale == T::one() {
            (unscaled, None)
        } else {
            (
                self.coeffs
                    .iter()
                    .map(|&a| {
                        let (re, im) = to_pair(a);
                        [re, im]
                    })
                    .collect(),
                Some(self.scale.f64()),
            )
        };
        let (cre, cim) = to_pair(self.center);
        SeriesJson {
            format_version: crate::io::FORMAT_VERSION,
            center: [cre, cim],
            min_degree: self.min_degree,
            coeffs,
            order: self.order(),
            scale,
            tail_bound: self.tail.map(|t| [t.bound.f64(), t.radius.f64()]),
        }
    }

    /// Inverse of [`PowerSeries::to_json`].
    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        if j.coeffs.len() as i32 != j.order - j.min_degree {
            return Err(Error::Invalid(
                "coeffs length must equal order − minDegree".into(),
            ));
        }
        let center = Complex::new(T::of(j.center[0]), T::of(j.center[1]));
        let coeffs = j
            .coeffs
            .iter()
            .map(|c| Complex::new(T::of(c[0]), T::of(c[1])))
            .collect();
        let mut s = match j.scale {
            Some(sc) => Self::with_scale(center, T::of(sc), j.min_degree, coeffs),
            None => Self::new(center, j.min_degree, coeffs),
        };
        if let Some([b, r]) = j.tail_bound {
            s = s.with_tail_bound(T::of(b), T::of(r));
        }
        Ok(s)
    }
}

/// Serialized [`PowerSeries`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeriesJson {
    pub format_version: u32,
    pub center: [f64; 2],
    pub min_degree: i32,
    pub coeffs: Vec<[f64; 2]>,
    pub order: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<[f64; 2]>,
}
