//! Real scalar abstraction shared by every numerical routine.
//!
//! All algorithms are written against [`Scalar`] so the same code runs in
//! `f32`, `f64` or double-double ([`DoubleDouble`], about 106 bits).

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub use crate::dd::DoubleDouble;

/// A real floating-point type usable as the component type of [`Cplx`].
pub trait Scalar:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Number of significand bits carried by the type.
    const PRECISION_BITS: u32;

    /// Lossy conversion from `f64`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to every scalar type")
    }

    /// Lossy conversion to `f64`.
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact conversion of a small integer.
    #[inline]
    fn int(n: i64) -> Self {
        Self::from_i64(n).expect("integer converts to every scalar type")
    }

    /// Tolerance for coefficient-level identities: `10^(-bits/8)`.
    fn coeff_tol() -> Self {
        Self::of(10f64.powf(-(Self::PRECISION_BITS as f64) / 8.0))
    }

    /// Smallest tolerance a solver may be asked for: `2^(-bits/2)`.
    fn tol_floor() -> Self {
        Self::of(2f64.powf(-(Self::PRECISION_BITS as f64) / 2.0))
    }
}

impl Scalar for f32 {
    const PRECISION_BITS: u32 = 24;
}

impl Scalar for f64 {
    const PRECISION_BITS: u32 = 53;
}

impl Scalar for DoubleDouble {
    const PRECISION_BITS: u32 = 106;
}

/// Complex number over a [`Scalar`].
pub type Cplx<T> = Complex<T>;

/// Builds a complex number from two `f64` components.
#[inline]
pub fn cx<T: Scalar>(re: f64, im: f64) -> Cplx<T> {
    Complex::new(T::of(re), T::of(im))
}

/// Embeds a real scalar.
#[inline]
pub fn real<T: Scalar>(x: T) -> Cplx<T> {
    Complex::new(x, T::zero())
}

/// Converts to a pair of `f64` for reporting and serialization.
#[inline]
pub fn to_pair<T: Scalar>(z: Cplx<T>) -> (f64, f64) {
    (z.re.f64(), z.im.f64())
}

/// Converts to a `Complex<f64>`.
#[inline]
pub fn to_c64<T: Scalar>(z: Cplx<T>) -> Complex<f64> {
    Complex::new(z.re.f64(), z.im.f64())
}

/// Converts from a `Complex<f64>`.
#[inline]
pub fn from_c64<T: Scalar>(z: Complex<f64>) -> Cplx<T> {
    cx(z.re, z.im)
}

/// `true` when both components are finite.
#[inline]
pub fn is_finite<T: Scalar>(z: Cplx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Integer power by repeated squaring (exact for small exponents).
pub fn powi<T: Scalar>(z: Cplx<T>, n: i32) -> Cplx<T> {
    if n < 0 {
        return Complex::new(T::one(), T::zero()) / powi(z, -n);
    }
    let mut acc = Complex::new(T::one(), T::zero());
    let mut base = z;
    let mut e = n as u32;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// Principal logarithm; on the negative real axis (including `-0.0`
/// imaginary part) the upper-side limit `ln|z| + iπ` is returned.
pub fn log_upper<T: Scalar>(z: Cplx<T>) -> Cplx<T> {
    if z.im == T::zero() && z.re < T::zero() {
        return Complex::new((-z.re).ln(), T::PI());
    }
    z.ln()
}

/// Principal power `base^s = exp(s log base)`.
pub fn powc<T: Scalar>(base: Cplx<T>, s: Cplx<T>) -> Cplx<T> {
    (s * log_upper(base)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn precision_floors() {
        assert!(f64::tol_floor() > 1e-9 && f64::tol_floor() < 1e-7);
        assert!(DoubleDouble::tol_floor().f64() < 1e-15);
        assert!((f64::coeff_tol() - 10f64.powf(-53.0 / 8.0)).abs() < 1e-20);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let z: Cplx<f64> = cx(0.3, -1.2);
        let direct = z * z * z * z * z;
        assert!((powi(z, 5) - direct).norm() < 1e-14);
        assert!((powi(z, -2) * z * z - cx::<f64>(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn log_takes_upper_side_on_cut() {
        let l = log_upper(Complex::new(-2.0f64, -0.0));
        assert!((l.im - std::f64::consts::PI).abs() < 1e-15);
        assert!((l.re - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn double_double_carries_more_digits() {
        let third = DoubleDouble::one() / DoubleDouble::int(3);
        let back = third * DoubleDouble::int(3) - DoubleDouble::one();
        assert!(back.abs().f64() < 1e-30);
    }
}
