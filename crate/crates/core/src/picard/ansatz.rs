use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::equation::{abel_normalize, RationalMap};
use crate::error::{Error, Result};
use crate::scalar::{is_finite, powc, powi, to_pair, Cplx, Scalar};

/// Orbit check of `κ/(y − γ)^m = z + α + β·b(z) + W(z)`, where `b(z) = log z`
/// for `m = 1` and `z^{(m−1)/m}` for `m ≥ 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnsatzReport {
    pub m: usize,
    pub kappa: (f64, f64),
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
    /// `β` predicted by the normal form.
    pub beta_expected: (f64, f64),
    /// Coefficient of an extra `log z` column (fitted for `m ≥ 2` only).
    pub log_coeff: (f64, f64),
    /// `max |W(z_n)|·|z_n|^{1/m−δ}` over the second half of the orbit.
    pub max_scaled_residual: f64,
    /// The same without the `log z` column.
    pub pure_max_scaled_residual: f64,
    pub pass: bool,
    pub pure_pass: bool,
}

/// Least squares by modified Gram–Schmidt on the columns.
fn lstsq<T: Scalar>(cols: &[Vec<Cplx<T>>], rhs: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
    let n = cols.len();
    let mut q: Vec<Vec<Cplx<T>>> = cols.to_vec();
    let mut r = vec![vec![Complex::<T>::zero(); n]; n];
    let dot = |a: &[Cplx<T>], b: &[Cplx<T>]| {
        a.iter()
            .zip(b)
            .fold(Complex::zero(), |s, (x, y)| s + x.conj() * *y)
    };
    for k in 0..n {
        for i in 0..k {
            let p = dot(&q[i], &q[k]);
            r[i][k] = p;
            let qi = q[i].clone();
            for (a, b) in q[k].iter_mut().zip(&qi) {
                *a -= *b * p;
            }
        }
        let norm = dot(&q[k], &q[k]).re.sqrt();
        if norm <= T::epsilon() {
            return Err(Error::Degenerate("collinear fit columns".into()));
        }
        r[k][k] = Complex::new(norm, T::zero());
        for a in q[k].iter_mut() {
            *a /= norm;
        }
    }
    let qb: Vec<Cplx<T>> = q.iter().map(|qi| dot(qi, rhs)).collect();
    let mut x = vec![Complex::zero(); n];
    for k in (0..n).rev() {
        let mut s = qb[k];
        for j in k + 1..n {
            s -= r[k][j] * x[j];
        }
        x[k] = s / r[k][k];
    }
    Ok(x)
}

/// Iterates `R` from `seed` for `steps` steps, transforms the orbit by
/// `Z = κ/(y − γ)^m` with `κ = −1/(m r_{m+1})`, and compares `Z_n` with
/// `z_n = Z₀ + n`. `alpha_beta` skips the fit.
pub fn verify_parabolic_ansatz<T: Scalar>(
    r: &RationalMap<T>,
    gamma: Cplx<T>,
    m: usize,
    alpha_beta: Option<(Cplx<T>, Cplx<T>)>,
    seed: Cplx<T>,
    steps: usize,
    delta: T,
) -> Result<AnsatzReport> {
    if m == 0 || steps < 20 {
        return Err(Error::Invalid("need m ≥ 1 and at least 20 steps".into()));
    }
    let norm = abel_normalize(r, gamma, m + 2, T::coeff_tol())?;
    if norm.m != m {
        return Err(Error::Invalid(format!(
            "the fixed point has m = {}, not {m}",
            norm.m
        )));
    }
    let kappa = norm.kappa;
    let d0 = (seed - gamma).norm();
    let mut y = seed;
    let mut zs = Vec::with_capacity(steps + 1);
    for n in 0..=steps {
        if n > 0 {
            y = r.eval(y).map_err(|_| Error::PetalEscape { step: n })?;
        }
        let d = y - gamma;
        if !is_finite(y) || d.norm() > d0 * T::of(2.0) || d.is_zero() {
            return Err(Error::PetalEscape { step: n });
        }
        zs.push(kappa / powi(d, m as i32));
    }
    let z0 = zs[0];
    let pts: Vec<Cplx<T>> = (0..=steps).map(|n| z0 + T::int(n as i64)).collect();
    let basis = |z: Cplx<T>| {
        if m == 1 {
            z.ln()
        } else {
            powc(
                z,
                Complex::new(T::int(m as i64 - 1) / T::int(m as i64), T::zero()),
            )
        }
    };
    let fit_from = steps / 10;
    let tail_from = steps / 2;
    let stride = ((steps - fit_from) / 4000).max(1);
    let idx: Vec<usize> = (fit_from..=steps).step_by(stride).collect();
    let rhs: Vec<Cplx<T>> = idx.iter().map(|&n| zs[n] - pts[n]).collect();
    let ones = vec![Complex::<T>::one(); idx.len()];
    let bcol: Vec<Cplx<T>> = idx.iter().map(|&n| basis(pts[n])).collect();
    let lcol: Vec<Cplx<T>> = idx.iter().map(|&n| pts[n].ln()).collect();
    let (alpha, beta, log_coeff, pure) = match alpha_beta {
        Some((a, b)) => (a, b, Complex::zero(), (a, b)),
        None if m == 1 => {
            let x = lstsq(&[ones, bcol], &rhs)?;
            (x[0], x[1], Complex::zero(), (x[0], x[1]))
        }
        None => {
            let x = lstsq(&[ones.clone(), bcol.clone(), lcol], &rhs)?;
            let p = lstsq(&[ones, bcol], &rhs)?;
            (x[0], x[1], x[2], (p[0], p[1]))
        }
    };
    let e = T::one() / T::int(m as i64) - delta;
    let scaled = |a: Cplx<T>, b: Cplx<T>, l: Cplx<T>| {
        (tail_from..=steps).fold(T::zero(), |acc, n| {
            let z = pts[n];
            let w = zs[n] - z - a - b * basis(z) - l * z.ln();
            acc.max(w.norm() * z.norm().powf(e))
        })
    };
    let full = scaled(alpha, beta, log_coeff).f64();
    let pure_res = scaled(pure.0, pure.1, Complex::zero()).f64();
    Ok(AnsatzReport {
        m,
        kappa: to_pair(kappa),
        alpha: to_pair(alpha),
        beta: to_pair(beta),
        beta_expected: to_pair(norm.beta()),
        log_coeff: to_pair(log_coeff),
        max_scaled_residual: full,
        pure_max_scaled_residual: pure_res,
        pass: full <= 1.0,
        pure_pass: pure_res <= 1.0,
    })
}
