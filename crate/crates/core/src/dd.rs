//! Double-double real numbers: an unevaluated sum `hi + lo` of two `f64`
//! with `|lo| ≤ ulp(hi)/2`, giving about 106 significand bits.
//!
//! Arithmetic uses error-free transformations (`two_sum`, and `two_prod`
//! via fused multiply-add). Transcendental functions use argument reduction
//! followed by Taylor series or Newton refinement of the `f64` result.

use std::cmp::Ordering;
use std::f64::consts;
use std::fmt;
use std::num::FpCategory;
use std::ops::{
    Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign,
};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

#[derive(Clone, Copy, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    /// Builds from a pair assumed normalized (`|lo| ≤ ulp(hi)/2`).
    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    pub const fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        if !hi.is_finite() {
            return DoubleDouble { hi, lo: 0.0 };
        }
        let (h, l) = quick_two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        Self::renorm(p1, p2 + self.lo * b)
    }

    /// Multiplication by an exact power of two.
    fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        DoubleDouble {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    fn sqr(self) -> Self {
        let (p1, p2) = two_prod(self.hi, self.hi);
        Self::renorm(p1, p2 + 2.0 * self.hi * self.lo + self.lo * self.lo)
    }

    const EPS: f64 = 4.930380657631324e-32; // 2^-104

    /// Parses a decimal literal such as `-12.5e-3`.
    pub fn parse_decimal(src: &str) -> Option<Self> {
        let s = src.trim();
        let (neg, body) = match s.as_bytes().first()? {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(p) => (&body[..p], body[p + 1..].parse::<i32>().ok()?),
            None => (body, 0),
        };
        let (int_part, frac_part) = match mant.find('.') {
            Some(p) => (&mant[..p], &mant[p + 1..]),
            None => (mant, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        let ten = Self::from_f64(10.0);
        let mut v = Self::zero();
        for ch in int_part.chars().chain(frac_part.chars()) {
            let d = ch.to_digit(10)?;
            v = v * ten + Self::from_f64(d as f64);
        }
        let e = exp - frac_part.len() as i32;
        if e != 0 {
            let p = ten.powi(e.abs());
            v = if e > 0 { v * p } else { v / p };
        }
        Some(if neg { -v } else { v })
    }

    fn exp_impl(self) -> Self {
        if self.hi > 709.8 {
            return Self::infinity();
        }
        if self.hi < -745.2 {
            return Self::zero();
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Self::one();
        }
        let ln2 = <Self as FloatConst>::LN_2();
        let k = (self.hi / ln2.hi).round();
        let r = (self - ln2.mul_f64(k)).ldexp(-9);
        // Taylor series of e^r − 1 for |r| ≤ ln2/1024.
        let mut term = r;
        let mut sum = r;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = term * r / Self::from_f64(n);
            sum += term;
            if term.hi.abs() <= Self::EPS * 1e-3 * sum.hi.abs().max(1e-300) {
                break;
            }
            if n > 30.0 {
                break;
            }
        }
        // (1 + s)^512 − 1 by repeated squaring of 1 + s.
        for _ in 0..9 {
            sum = sum.ldexp(1) + sum.sqr();
        }
        (sum + Self::one()).ldexp(k as i32)
    }

    fn ln_impl(self) -> Self {
        if self.hi < 0.0 || self.is_nan() {
            return Self::nan();
        }
        if self.hi == 0.0 {
            return Self::neg_infinity();
        }
        if self.hi.is_infinite() {
            return self;
        }
        let mut y = Self::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp_impl() - Self::one();
        }
        y
    }

    /// sin and cos of an argument reduced to `|t| ≤ π/4`.
    fn sin_cos_small(t: Self) -> (Self, Self) {
        let t2 = t.sqr();
        let mut s = t;
        let mut term = t;
        let mut n = 1.0;
        while term.hi.abs() > Self::EPS * 1e-3 * s.hi.abs().max(1e-300) && n < 60.0 {
            term = -term * t2 / Self::from_f64((n + 1.0) * (n + 2.0));
            s += term;
            n += 2.0;
        }
        let mut c = Self::one();
        let mut term = Self::one();
        let mut n = 0.0;
        while term.hi.abs() > Self::EPS * 1e-3 && n < 60.0 {
            term = -term * t2 / Self::from_f64((n + 1.0) * (n + 2.0));
            c += term;
            n += 2.0;
        }
        (s, c)
    }

    fn sin_cos_impl(self) -> (Self, Self) {
        if !self.is_finite() {
            return (Self::nan(), Self::nan());
        }
        let tau = <Self as FloatConst>::TAU();
        let half_pi = <Self as FloatConst>::FRAC_PI_2();
        let k = (self.hi / tau.hi).round();
        let mut t = self - tau.mul_f64(k);
        let j = (t.hi / half_pi.hi).round();
        t -= half_pi.mul_f64(j);
        let (s, c) = Self::sin_cos_small(t);
        match (j as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    fn atan2_impl(y: Self, x: Self) -> Self {
        if x.is_zero() && y.is_zero() {
            return Self::zero();
        }
        if x.is_nan() || y.is_nan() {
            return Self::nan();
        }
        let r = (x.sqr() + y.sqr()).sqrt();
        let (xx, yy) = (x / r, y / r);
        let mut z = Self::from_f64(y.hi.atan2(x.hi));
        for _ in 0..2 {
            let (s, c) = z.sin_cos_impl();
            if xx.hi.abs() > yy.hi.abs() {
                z += (yy - s) / c;
            } else {
                z -= (xx - c) / s;
            }
        }
        z
    }

    fn expm1_impl(self) -> Self {
        if self.hi.abs() > 0.5 {
            return self.exp_impl() - Self::one();
        }
        let mut term = self;
        let mut sum = self;
        let mut n = 1.0;
        while term.hi.abs() > Self::EPS * 1e-3 * sum.hi.abs().max(1e-300) && n < 60.0 {
            n += 1.0;
            term = term * self / Self::from_f64(n);
            sum += term;
        }
        sum
    }

    fn ln1p_impl(self) -> Self {
        if self.hi.abs() > 0.5 {
            return (Self::one() + self).ln_impl();
        }
        let mut y = Self::from_f64(self.hi.ln_1p());
        for _ in 0..2 {
            let e = y.expm1_impl();
            y -= (e - self) / (e + Self::one());
        }
        y
    }
}

impl PartialEq for DoubleDouble {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    /// Scientific notation with 32 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.hi.is_finite() {
            return write!(f, "{}", self.hi);
        }
        if self.hi == 0.0 {
            return write!(f, "0e0");
        }
        let mut x = self.abs();
        let ten = Self::from_f64(10.0);
        let mut e = x.hi.log10().floor() as i32;
        x = if e >= 0 {
            x / ten.powi(e)
        } else {
            x * ten.powi(-e)
        };
        if x.hi >= 10.0 {
            x /= ten;
            e += 1;
        } else if x.hi < 1.0 {
            x *= ten;
            e -= 1;
        }
        let mut digits = Vec::with_capacity(33);
        for _ in 0..33 {
            let d = x.hi.floor().clamp(0.0, 9.0);
            digits.push(d as u8);
            x = (x - Self::from_f64(d)) * ten;
        }
        // Round on the 33rd digit.
        if digits[32] >= 5 {
            let mut i = 31;
            loop {
                if digits[i] == 9 {
                    digits[i] = 0;
                    if i == 0 {
                        digits.insert(0, 1);
                        e += 1;
                        break;
                    }
                    i -= 1;
                } else {
                    digits[i] += 1;
                    break;
                }
            }
        }
        digits.truncate(32);
        while digits.len() > 1 && *digits.last().unwrap() == 0 {
            digits.pop();
        }
        let sign = if self.hi < 0.0 { "-" } else { "" };
        let mut s = format!("{sign}{}", digits[0]);
        if digits.len() > 1 {
            s.push('.');
            for d in &digits[1..] {
                s.push((b'0' + d) as char);
            }
        }
        write!(f, "{s}e{e}")
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        if !s1.is_finite() {
            return Self::from_f64(s1);
        }
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Self::renorm(s1, s2 + t2)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        if !p1.is_finite() {
            return Self::from_f64(p1);
        }
        Self::renorm(p1, p2 + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() || b.hi == 0.0 {
            return Self::from_f64(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self::from_parts(q1, q2) + Self::from_f64(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        self - (self / b).trunc() * b
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for DoubleDouble {
            fn $m(&mut self, b: Self) {
                *self = *self $op b;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = String;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        if radix != 10 {
            return Err(format!("radix {radix} unsupported"));
        }
        Self::parse_decimal(s).ok_or_else(|| format!("invalid decimal literal {s:?}"))
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        let hi = t.hi.to_i64()?;
        let lo = t.lo.to_i64()?;
        hi.checked_add(lo)
    }
    fn to_u64(&self) -> Option<u64> {
        let v = self.to_i64()?;
        u64::try_from(v).ok()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::renorm(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::renorm(hi, lo))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(DoubleDouble::from_f64(x))
    }
}

impl NumCast for DoubleDouble {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        if let Some(i) = n.to_i64() {
            if let Some(f) = n.to_f64() {
                if f.fract() == 0.0 {
                    return <Self as FromPrimitive>::from_i64(i);
                }
            }
        }
        n.to_f64().map(DoubleDouble::from_f64)
    }
}

// High parts are the f64 constants; low parts carry the rounding error.
impl FloatConst for DoubleDouble {
    fn E() -> Self {
        Self::from_parts(consts::E, 1.4456468917292502e-16)
    }
    fn FRAC_1_PI() -> Self {
        Self::from_parts(consts::FRAC_1_PI, -1.9678676675182486e-17)
    }
    fn FRAC_1_SQRT_2() -> Self {
        Self::from_parts(consts::FRAC_1_SQRT_2, -4.833646656726457e-17)
    }
    fn FRAC_2_PI() -> Self {
        Self::from_parts(consts::FRAC_2_PI, -3.935735335036497e-17)
    }
    fn FRAC_2_SQRT_PI() -> Self {
        Self::from_parts(consts::FRAC_2_SQRT_PI, 1.533545961316588e-17)
    }
    fn FRAC_PI_2() -> Self {
        Self::from_parts(consts::FRAC_PI_2, 6.123233995736766e-17)
    }
    fn FRAC_PI_3() -> Self {
        Self::from_parts(consts::FRAC_PI_3, -1.072081766451091e-16)
    }
    fn FRAC_PI_4() -> Self {
        Self::from_parts(consts::FRAC_PI_4, 3.061616997868383e-17)
    }
    fn FRAC_PI_6() -> Self {
        Self::from_parts(consts::FRAC_PI_6, -5.360408832255455e-17)
    }
    fn FRAC_PI_8() -> Self {
        Self::from_parts(consts::FRAC_PI_8, 1.5308084989341915e-17)
    }
    fn LN_10() -> Self {
        Self::from_parts(consts::LN_10, -2.1707562233822494e-16)
    }
    fn LN_2() -> Self {
        Self::from_parts(consts::LN_2, 2.3190468138462996e-17)
    }
    fn LOG10_E() -> Self {
        Self::from_parts(consts::LOG10_E, 1.098319650216765e-17)
    }
    fn LOG2_E() -> Self {
        Self::from_parts(consts::LOG2_E, 2.0355273740931033e-17)
    }
    fn PI() -> Self {
        Self::from_parts(consts::PI, 1.2246467991473532e-16)
    }
    fn SQRT_2() -> Self {
        Self::from_parts(consts::SQRT_2, -9.667293313452913e-17)
    }
    fn TAU() -> Self {
        Self::from_parts(consts::TAU, 2.4492935982947064e-16)
    }
    fn LOG10_2() -> Self {
        Self::from_parts(consts::LOG10_2, -2.8037281277851704e-18)
    }
    fn LOG2_10() -> Self {
        Self::from_parts(consts::LOG2_10, 1.661617516973592e-16)
    }
}

impl Float for DoubleDouble {
    fn nan() -> Self {
        Self::from_f64(f64::NAN)
    }
    fn infinity() -> Self {
        Self::from_f64(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        Self::from_f64(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        Self::from_f64(-0.0)
    }
    fn min_value() -> Self {
        Self::from_f64(f64::MIN)
    }
    fn min_positive_value() -> Self {
        Self::from_f64(f64::MIN_POSITIVE)
    }
    fn max_value() -> Self {
        Self::from_f64(f64::MAX)
    }
    fn epsilon() -> Self {
        Self::from_f64(Self::EPS)
    }
    fn is_nan(self) -> bool {
        self.hi.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.hi.classify()
    }
    fn floor(self) -> Self {
        let h = self.hi.floor();
        if h == self.hi {
            Self::renorm(h, self.lo.floor())
        } else {
            Self::from_f64(h)
        }
    }
    fn ceil(self) -> Self {
        let h = self.hi.ceil();
        if h == self.hi {
            Self::renorm(h, self.lo.ceil())
        } else {
            Self::from_f64(h)
        }
    }
    fn round(self) -> Self {
        (self + Self::from_f64(0.5)).floor()
    }
    fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        Self::from_f64(self.hi.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Self::one();
        let mut base = self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }
    fn powf(self, n: Self) -> Self {
        if n.fract().is_zero() && n.hi.abs() < 1e9 {
            return self.powi(n.hi as i32);
        }
        if self.is_zero() {
            return if n.hi > 0.0 {
                Self::zero()
            } else {
                Self::infinity()
            };
        }
        (n * self.ln_impl()).exp_impl()
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::zero()
            } else {
                Self::nan()
            };
        }
        if self.hi.is_infinite() {
            return self;
        }
        let q = self.hi.sqrt();
        let r = self - Self::from_f64(q).sqr();
        Self::renorm(q, r.hi / (2.0 * q))
    }
    fn exp(self) -> Self {
        self.exp_impl()
    }
    fn exp2(self) -> Self {
        (self * <Self as FloatConst>::LN_2()).exp_impl()
    }
    fn ln(self) -> Self {
        self.ln_impl()
    }
    fn log(self, base: Self) -> Self {
        self.ln_impl() / base.ln_impl()
    }
    fn log2(self) -> Self {
        self.ln_impl() * <Self as FloatConst>::LOG2_E()
    }
    fn log10(self) -> Self {
        self.ln_impl() * <Self as FloatConst>::LOG10_E()
    }
    fn max(self, other: Self) -> Self {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }
    fn min(self, other: Self) -> Self {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            Self::zero()
        }
    }
    fn cbrt(self) -> Self {
        if self.is_zero() {
            return self;
        }
        let mut y = Self::from_f64(self.hi.cbrt());
        for _ in 0..2 {
            y -= (y.powi(3) - self) / (y.sqr() * Self::from_f64(3.0));
        }
        y
    }
    fn hypot(self, other: Self) -> Self {
        let a = self.abs();
        let b = other.abs();
        let m = a.max(b);
        if m.is_zero() || !m.is_finite() {
            return m;
        }
        let e = m.hi.log2().floor() as i32;
        let (a, b) = (a.ldexp(-e), b.ldexp(-e));
        (a.sqr() + b.sqr()).sqrt().ldexp(e)
    }
    fn sin(self) -> Self {
        self.sin_cos_impl().0
    }
    fn cos(self) -> Self {
        self.sin_cos_impl().1
    }
    fn tan(self) -> Self {
        let (s, c) = self.sin_cos_impl();
        s / c
    }
    fn asin(self) -> Self {
        Self::atan2_impl(self, (Self::one() - self.sqr()).sqrt())
    }
    fn acos(self) -> Self {
        Self::atan2_impl((Self::one() - self.sqr()).sqrt(), self)
    }
    fn atan(self) -> Self {
        Self::atan2_impl(self, Self::one())
    }
    fn atan2(self, other: Self) -> Self {
        Self::atan2_impl(self, other)
    }
    fn sin_cos(self) -> (Self, Self) {
        self.sin_cos_impl()
    }
    fn exp_m1(self) -> Self {
        self.expm1_impl()
    }
    fn ln_1p(self) -> Self {
        self.ln1p_impl()
    }
    fn sinh(self) -> Self {
        if self.hi.abs() < 0.5 {
            let e = self.expm1_impl();
            return (e + e / (e + Self::one())).ldexp(-1);
        }
        let e = self.exp_impl();
        (e - e.recip()).ldexp(-1)
    }
    fn cosh(self) -> Self {
        let e = self.exp_impl();
        (e + e.recip()).ldexp(-1)
    }
    fn tanh(self) -> Self {
        if self.hi.abs() > 40.0 {
            return Self::from_f64(self.hi.signum());
        }
        let e = self.ldexp(1).expm1_impl();
        e / (e + Self::from_f64(2.0))
    }
    fn asinh(self) -> Self {
        let a = self.abs();
        let r = (a + (a.sqr() + Self::one()).sqrt()).ln_impl();
        if self.hi < 0.0 {
            -r
        } else {
            r
        }
    }
    fn acosh(self) -> Self {
        (self + (self.sqr() - Self::one()).sqrt()).ln_impl()
    }
    fn atanh(self) -> Self {
        ((Self::one() + self) / (Self::one() - self))
            .ln_impl()
            .ldexp(-1)
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = DoubleDouble;

    /// Reference values as (hi, lo) pairs, computed to 60 digits.
    fn close(x: D, hi: f64, lo: f64, rel: f64) -> bool {
        let err = (x - D::from_parts(hi, lo)).abs();
        err.hi <= rel * hi.abs()
    }

    #[test]
    fn division_is_correctly_rounded_to_double_double() {
        let third = D::one() / D::from_f64(3.0);
        assert!(close(
            third,
            0.3333333333333333,
            1.850371707708594e-17,
            1e-31
        ));
        let back = third * D::from_f64(3.0) - D::one();
        assert!(back.abs().hi < 1e-31);
    }

    #[test]
    fn elementary_functions_reach_about_100_bits() {
        let one = D::one();
        assert!(close(
            D::from_f64(2.0).sqrt(),
            std::f64::consts::SQRT_2,
            -9.667293313452913e-17,
            1e-31
        ));
        assert!(close(
            one.exp(),
            std::f64::consts::E,
            1.4456468917292502e-16,
            1e-30
        ));
        assert!(close(
            D::from_f64(3.0).ln(),
            1.0986122886681098,
            -9.07129723500153e-17,
            1e-30
        ));
        assert!(close(
            one.sin(),
            0.8414709848078965,
            1.776_845_092_935_536e-18,
            1e-30
        ));
        assert!(close(
            one.cos(),
            0.5403023058681398,
            -4.760954612604417e-17,
            1e-30
        ));
        assert!(close(
            Float::atan2(one, D::from_f64(3.0)),
            0.3217505543966422,
            7.917392525722143e-18,
            1e-30
        ));
        assert!(close(
            D::from_f64(-40.25).exp(),
            3.3086216207858244e-18,
            1.3601916932590803e-34,
            1e-29
        ));
        assert!(close(
            D::from_f64(12345.678).ln(),
            9.421061321291832,
            -1.9085650743481053e-16,
            1e-30
        ));
    }

    #[test]
    fn decimal_parsing_beats_f64() {
        let tenth = D::parse_decimal("0.1").unwrap();
        let back = tenth * D::from_f64(10.0) - D::one();
        assert!(back.abs().hi < 1e-31);
        assert_eq!(D::parse_decimal("-2.5e2").unwrap(), D::from_f64(-250.0));
        assert!(D::parse_decimal("abc").is_none());
    }

    #[test]
    fn display_prints_32_digits() {
        let third = D::one() / D::from_f64(3.0);
        assert_eq!(third.to_string(), "3.3333333333333333333333333333333e-1");
        assert_eq!(D::from_f64(-250.0).to_string(), "-2.5e2");
    }

    #[test]
    fn rounding_helpers() {
        assert_eq!(D::from_f64(2.5).floor(), D::from_f64(2.0));
        assert_eq!(D::from_f64(-2.5).trunc(), D::from_f64(-2.0));
        assert_eq!(D::from_f64(-2.5).ceil(), D::from_f64(-2.0));
        assert_eq!(
            <D as FromPrimitive>::from_i64(1 << 60).unwrap().to_i64(),
            Some(1 << 60)
        );
    }
}
