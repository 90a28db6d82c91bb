use num_complex::Complex;
use num_traits::{One, Zero};

use crate::numerics::series::PowerSeries;
use crate::scalar::{Cplx, Scalar};

/// Polynomial with ascending complex coefficients; trailing exact zeros are
/// trimmed so the stored leading coefficient is nonzero (the zero
/// polynomial has no coefficients).
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T: Scalar> {
    coeffs: Vec<Cplx<T>>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<Cplx<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| Complex::new(T::of(c), T::zero()))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Cplx<T>) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `y`.
    pub fn var() -> Self {
        Self::new(vec![Complex::zero(), Complex::one()])
    }

    /// `Π (y − r)` over the given roots.
    pub fn from_roots(roots: &[Cplx<T>]) -> Self {
        let mut p = Self::constant(Complex::one());
        for &r in roots {
            p = p.mul(&Self::new(vec![-r, Complex::one()]));
        }
        p
    }

    pub fn coeffs(&self) -> &[Cplx<T>] {
        &self.coeffs
    }

    /// Coefficient of `y^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Cplx<T> {
        self.coeffs.get(k).copied().unwrap_or_else(Complex::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Cplx<T> {
        self.coeffs.last().copied().unwrap_or_else(Complex::zero)
    }

    /// Largest coefficient modulus.
    pub fn scale(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, y: Cplx<T>) -> Cplx<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::zero(), |acc, &c| acc * y + c)
    }

    /// Value and first derivative by a single Horner pass.
    pub fn eval_with_derivative(&self, y: Cplx<T>) -> (Cplx<T>, Cplx<T>) {
        let mut p = Complex::zero();
        let mut d = Complex::zero();
        for &c in self.coeffs.iter().rev() {
            d = d * y + p;
            p = p * y + c;
        }
        (p, d)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::int(k as i64))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn mul_scalar(&self, k: Cplx<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(Complex::one()), |acc, _| acc.mul(self))
    }

    /// Coefficients of `p(a + x)` in `x` (Taylor shift).
    pub fn shifted(&self, a: Cplx<T>) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for k in (i..n.saturating_sub(1)).rev() {
                let next = c[k + 1];
                c[k] += a * next;
            }
        }
        Self::new(c)
    }

    /// Taylor expansion at `a` as a series of the given order.
    pub fn to_series(&self, a: Cplx<T>, order: usize) -> PowerSeries<T> {
        let s = self.shifted(a);
        let coeffs = (0..order.max(1)).map(|k| s.coeff(k)).collect();
        PowerSeries::new(a, 0, coeffs)
    }

    /// Drops leading coefficients whose modulus is below `tol · scale`.
    pub fn trimmed(&self, tol: T) -> Self {
        let s = self.scale();
        let mut c = self.coeffs.clone();
        while c.last().is_some_and(|x| x.norm() <= tol * s) {
            c.pop();
        }
        Self::new(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn shift_matches_direct_evaluation() {
        let p = Polynomial::<f64>::from_real(&[1.0, -2.0, 0.5, 3.0]);
        let a = cx(0.3, -0.7);
        let q = p.shifted(a);
        let x = cx(0.11, 0.42);
        assert!((q.eval(x) - p.eval(a + x)).norm() < 1e-13);
    }

    #[test]
    fn derivative_by_horner_matches_formal() {
        let p = Polynomial::<f64>::from_real(&[2.0, 0.0, -1.0, 4.0]);
        let y = cx(1.5, 0.5);
        let (v, d) = p.eval_with_derivative(y);
        assert!((v - p.eval(y)).norm() < 1e-13);
        assert!((d - p.derivative().eval(y)).norm() < 1e-13);
    }

    #[test]
    fn from_roots_vanishes_at_roots() {
        let roots = [cx(1.0, 0.0), cx(0.0, 2.0), cx(-0.5, 0.5)];
        let p = Polynomial::<f64>::from_roots(&roots);
        assert_eq!(p.degree(), 3);
        for r in roots {
            assert!(p.eval(r).norm() < 1e-13);
        }
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = Polynomial::<f64>::from_real(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert!(Polynomial::<f64>::from_real(&[0.0]).is_zero());
    }
}
