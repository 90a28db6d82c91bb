use num_complex::Complex;
use num_traits::{One, Zero};

use crate::equation::rational::RationalMap;
use crate::error::{Error, Result};
use crate::numerics::PowerSeries;
use crate::scalar::{powc, powi, to_pair, Cplx, Scalar};

/// Near-translation form of a parabolic fixed point:
/// `F(ζ) = ζ + 1 + Σ_{j≥m} c_j ζ^{1−(j+1)/m}`; for `m = 1` this is
/// `ζ + 1 + Σ_{j≥1} c_j ζ^{−j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbelNormalization<T: Scalar> {
    /// Smallest `m ≥ 1` with `R^{(m+1)}(γ) ≠ 0`.
    pub m: usize,
    /// `c[j]` for `0 ≤ j ≤ J`; entries below `m` are zero.
    pub c: Vec<Cplx<T>>,
    /// `κ = −1/(m r_{m+1})`, so that `ζ = κ (y − γ)^{−m}`.
    pub kappa: Cplx<T>,
    /// Taylor coefficients `r_j = R^{(j)}(γ)/j!`.
    pub taylor: Vec<Cplx<T>>,
}

impl<T: Scalar> AbelNormalization<T> {
    /// `β = c₁` for `m = 1` and `m c_m/(m−1)` otherwise.
    pub fn beta(&self) -> Cplx<T> {
        let cm = self.c.get(self.m).copied().unwrap_or_else(Complex::zero);
        if self.m == 1 {
            cm
        } else {
            cm * T::int(self.m as i64) / T::int(self.m as i64 - 1)
        }
    }

    /// `F(ζ)` truncated at the stored `c_j`. `ζ^{1−(j+1)/m}` uses the
    /// principal power.
    pub fn apply(&self, zeta: Cplx<T>) -> Cplx<T> {
        let mut s = zeta + Complex::one();
        let m = T::int(self.m as i64);
        for (j, &cj) in self.c.iter().enumerate().skip(self.m) {
            if cj.is_zero() {
                continue;
            }
            let e = if self.m == 1 {
                powi(zeta, -(j as i32))
            } else {
                powc(
                    zeta,
                    Complex::new(T::one() - T::int(j as i64 + 1) / m, T::zero()),
                )
            };
            s += cj * e;
        }
        s
    }
}

/// Normalizes the parabolic fixed point `γ` of `R`:
/// `y = γ + 1/g`, then `ζ = κ g^m`, which turns `y ↦ R(y)` into
/// `ζ ↦ ζ + 1 + Σ c_j ζ^{1−(j+1)/m}`.
pub fn abel_normalize<T: Scalar>(
    r: &RationalMap<T>,
    gamma: Cplx<T>,
    j_max: usize,
    tol: T,
) -> Result<AbelNormalization<T>> {
    let coarse = r.taylor(gamma, j_max + 2)?;
    if (coarse.coeff(0) - gamma).norm() > tol * T::one().max(gamma.norm()) {
        return Err(Error::Invalid(format!(
            "γ = {:?} is not a fixed point",
            to_pair(gamma)
        )));
    }
    let r1 = coarse.coeff(1);
    if (r1 - Complex::one()).norm() > tol {
        return Err(Error::NotParabolic {
            multiplier: to_pair(r1),
        });
    }
    let scale = (1..j_max + 2).fold(T::one(), |s, j| s.max(coarse.coeff(j as i32).norm()));
    let m = (1..=j_max)
        .find(|&m| coarse.coeff(m as i32 + 1).norm() > tol * scale)
        .ok_or_else(|| {
            Error::Degenerate(format!("all derivatives of order 2..{} vanish", j_max + 1))
        })?;
    let order = j_max + 3;
    let full = r.taylor(gamma, order)?;
    let taylor: Vec<Cplx<T>> = (0..order).map(|j| full.coeff(j as i32)).collect();
    // P(w)/w = 1 + Σ_{j≥2} r_j w^{j−1}, with r_2..r_m treated as exact zeros.
    let mut p = vec![Complex::zero(); order - 1];
    p[0] = Complex::one();
    for (j, &rj) in taylor.iter().enumerate().skip(m + 1) {
        p[j - 1] = rj;
    }
    let q = PowerSeries::taylor(p).recip()?;
    let s = q.powu(m as u32)?;
    let r_m1 = taylor[m + 1];
    let kappa = -Complex::<T>::one() / (r_m1 * T::int(m as i64));
    let mut c = vec![Complex::zero(); j_max + 1];
    for (j, cj) in c.iter_mut().enumerate().skip(m) {
        let k = if m == 1 {
            powi(kappa, j as i32 + 1)
        } else {
            powc(
                kappa,
                Complex::new(T::int(j as i64 + 1) / T::int(m as i64), T::zero()),
            )
        };
        *cj = s.coeff(j as i32 + 1) * k;
    }
    Ok(AbelNormalization {
        m,
        c,
        kappa,
        taylor,
    })
}

/// Solves `w(λζ) = R(w(ζ))` for `w(ζ) = γ + αζ + Σ_{n≥2} w_n ζ^n` with
/// `λ = R'(γ)`, through degree `N`.
///
/// With `R = num/den`, the coefficient of `ζ^n` in
/// `w(λζ)·den(w(ζ)) − num(w(ζ))` is `den(γ)(λ^n − λ) w_n + E_n`, where `E_n`
/// only involves lower coefficients.
pub fn schroder_series<T: Scalar>(
    r: &RationalMap<T>,
    gamma: Cplx<T>,
    alpha: Cplx<T>,
    n_max: usize,
    tol: T,
) -> Result<PowerSeries<T>> {
    let lambda = r.derivative(gamma)?;
    let a = lambda.norm();
    if a <= tol || (a - T::one()).abs() <= tol {
        return Err(Error::Invalid(format!(
            "|R'(γ)| = {} must avoid 0 and 1",
            a.f64()
        )));
    }
    let d0 = r.den().eval(gamma);
    let order = n_max + 1;
    let num = r.num().to_series(gamma, order);
    let den = r.den().to_series(gamma, order);
    let mut w = vec![Complex::zero(); order.max(2)];
    w[0] = gamma;
    if order > 1 {
        w[1] = alpha;
    }
    let mut lam_n = lambda;
    for n in 2..order {
        lam_n *= lambda;
        let gap = lam_n - lambda;
        if gap.norm() < tol {
            return Err(Error::Resonance { order: n });
        }
        let cur = PowerSeries::taylor(w[..n].to_vec()).truncated(n as i32 + 1);
        let cur = PowerSeries::taylor((0..=n).map(|k| cur.coeff(k as i32)).collect());
        let scaled = PowerSeries::taylor(
            (0..=n)
                .map(|k| cur.coeff(k as i32) * powi(lambda, k as i32))
                .collect::<Vec<_>>(),
        );
        let den_w = PowerSeries::compose(&den.truncated(n as i32 + 1), &cur)?;
        let num_w = PowerSeries::compose(&num.truncated(n as i32 + 1), &cur)?;
        let e_n = scaled.mul(&den_w)?.coeff(n as i32) - num_w.coeff(n as i32);
        w[n] = -e_n / (d0 * gap);
    }
    w.truncate(order);
    Ok(PowerSeries::taylor(w))
}

/// Largest `|[ζ^n](w(λζ) − R(w(ζ)))|` for `n` below the series order.
pub fn schroder_residual<T: Scalar>(r: &RationalMap<T>, w: &PowerSeries<T>) -> Result<T> {
    let gamma = w.coeff(0);
    let lambda = r.derivative(gamma)?;
    let order = w.order() as usize;
    let rt = r.taylor(gamma, order)?;
    let rw = PowerSeries::compose(&rt, w)?;
    let mut worst = T::zero();
    for n in 0..order {
        let lhs = w.coeff(n as i32) * powi(lambda, n as i32);
        worst = worst.max((lhs - rw.coeff(n as i32)).norm());
    }
    Ok(worst)
}
