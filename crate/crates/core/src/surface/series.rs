use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numerics::PowerSeries;
use crate::scalar::{Cplx, Scalar};

/// Power-series solution `g(w) = Σ g_n wⁿ` of `g(λw) = λg(w) + g(w)²` with
/// `g₀ = 0` and `g'(0) = g₁`, plus what is known about its radius.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSolution<T: Scalar> {
    pub lambda: Cplx<T>,
    pub g1: Cplx<T>,
    pub series: PowerSeries<T>,
    /// Distance from 0 to the nearest singularity, once located.
    pub r_hat: Option<T>,
    pub radius_lower_bound: T,
}

impl<T: Scalar> ModelSolution<T> {
    pub fn with_rhat(mut self, r: T) -> Self {
        self.r_hat = Some(r);
        self
    }

    /// Radius inside which the truncated series is used directly.
    pub fn trust_radius(&self) -> T {
        match self.r_hat {
            Some(r) => r / T::of(2.0),
            None => self.radius_lower_bound,
        }
    }

    /// `g(w)` straight from the series (no continuation).
    pub fn eval(&self, w: Cplx<T>) -> Cplx<T> {
        self.series.eval_unchecked(w)
    }

    /// First branch point `w₀`: on the ray where `−g₁w > 0`.
    pub fn branch_point(&self) -> Result<Cplx<T>> {
        let r = self
            .r_hat
            .ok_or_else(|| Error::Invalid("branch radius not located yet".into()))?;
        let dir = -self.g1.conj() / self.g1.norm();
        Ok(dir * r)
    }

    /// `w_n = λ^{−n} w₀`.
    pub fn ladder_point(&self, n: usize) -> Result<Cplx<T>> {
        let mut w = self.branch_point()?;
        for _ in 0..n {
            w /= self.lambda;
        }
        Ok(w)
    }

    pub fn ladder(&self, count: usize) -> Result<Vec<Cplx<T>>> {
        (0..count).map(|n| self.ladder_point(n)).collect()
    }

    /// Distance from `w_n` to the nearest other ladder point.
    pub fn ladder_gap(&self, n: usize) -> Result<T> {
        let here = self.ladder_point(n)?;
        let up = (self.ladder_point(n + 1)? - here).norm();
        if n == 0 {
            return Ok(up);
        }
        Ok(up.min((here - self.ladder_point(n - 1)?).norm()))
    }
}

fn lambda_powers<T: Scalar>(lambda: Cplx<T>, n: usize) -> Vec<Cplx<T>> {
    let mut p = Vec::with_capacity(n + 1);
    let mut acc = Complex::new(T::one(), T::zero());
    for _ in 0..=n {
        p.push(acc);
        acc *= lambda;
    }
    p
}

/// `G_j = (λ^j − λ)^{−1} Σ_{s=1}^{j−1} G_s G_{j−s}` with `G₁ = g₁·scale`.
fn recurrence<T: Scalar>(lambda: Cplx<T>, g1: Cplx<T>, scale: T, n: usize) -> Result<Vec<Cplx<T>>> {
    let pw = lambda_powers(lambda, n);
    let mut g = vec![Complex::zero(); n + 1];
    if n >= 1 {
        g[1] = g1 * scale;
    }
    for j in 2..=n {
        let den = pw[j] - lambda;
        if den.norm() <= T::epsilon() * T::of(64.0) * lambda.norm() {
            return Err(Error::Resonance { order: j });
        }
        let mut s: Cplx<T> = Complex::zero();
        for k in 1..j {
            s += g[k] * g[j - k];
        }
        g[j] = s / den;
    }
    Ok(g)
}

/// Coefficients `g₁..g_N`. The series is stored in the variable `w/s` with
/// `s` a power of two near the radius, so large `N` does not overflow.
pub fn model_series<T: Scalar>(lambda: Cplx<T>, g1: Cplx<T>, n: usize) -> Result<ModelSolution<T>> {
    if n < 2 {
        return Err(Error::Invalid("need at least two coefficients".into()));
    }
    if lambda.is_zero() || (lambda.norm() - T::one()).abs() <= T::epsilon() {
        return Err(Error::Invalid("need 0 < |λ| ≠ 1".into()));
    }
    let pilot = recurrence(lambda, g1, T::one(), n.min(40))?;
    let m = pilot.len() - 1;
    let ratio = pilot[m - 1].norm() / pilot[m].norm();
    let scale = if ratio.is_finite() && ratio > T::zero() {
        T::of(2.0).powi(ratio.log2().floor().to_i32().unwrap_or(0))
    } else {
        T::one()
    };
    let coeffs = recurrence(lambda, g1, scale, n)?;
    let series = PowerSeries::with_scale(Complex::zero(), scale, 0, coeffs);
    Ok(ModelSolution {
        lambda,
        g1,
        series,
        r_hat: None,
        radius_lower_bound: majorant_bound(lambda, g1)?,
    })
}

/// `1/(4K|g₁|)` with `K = sup_{j≥2} |λ^j − λ|^{−1}`, a lower bound for the
/// radius of convergence. For real `λ ∈ (0, 1)`, `K = 1/(λ − λ²)`.
pub fn majorant_bound<T: Scalar>(lambda: Cplx<T>, g1: Cplx<T>) -> Result<T> {
    if g1.is_zero() {
        return Ok(T::infinity());
    }
    let mut k = T::zero();
    let mut p = lambda;
    // |λ^j − λ| tends to |λ| (|λ| < 1) or grows (|λ| > 1); 2000 terms settle the sup.
    for j in 2..2000 {
        p *= lambda;
        let d = (p - lambda).norm();
        if d.is_zero() {
            return Err(Error::Resonance { order: j });
        }
        k = k.max(T::one() / d);
        if p.norm() < T::epsilon() || p.norm() > T::one() / T::epsilon() {
            break;
        }
    }
    if lambda.norm() < T::one() {
        k = k.max(T::one() / lambda.norm());
    }
    Ok(T::one() / (T::of(4.0) * k * g1.norm()))
}

/// Radius of convergence estimated from the coefficient tail: a linear fit
/// of the ratios `|a_{n−s}/a_n|^{1/s}` against `1/n` over the last quarter
/// of the nonzero coefficients, extrapolated to `n → ∞`. Falls back to the
/// averaged root test when the ratios scatter.
pub fn estimate_radius<T: Scalar>(series: &PowerSeries<T>) -> Result<T> {
    let m0 = series.min_degree();
    let idx: Vec<(usize, T)> = series
        .scaled_coeffs()
        .iter()
        .enumerate()
        .filter_map(|(k, a)| {
            let n = k as i32 + m0;
            let r = a.norm();
            (n > 0 && r > T::zero() && r.is_finite()).then_some((n as usize, r))
        })
        .collect();
    if idx.len() < 20 {
        return Err(Error::InsufficientCoefficients {
            needed: 20,
            found: idx.len(),
        });
    }
    let tail = &idx[idx.len() - idx.len() / 4..];
    let ratios: Vec<(T, T)> = tail
        .windows(2)
        .map(|w| {
            let s = T::int((w[1].0 - w[0].0) as i64);
            (
                T::one() / T::int(w[1].0 as i64),
                (w[0].1 / w[1].1).powf(T::one() / s),
            )
        })
        .collect();
    let len = T::int(ratios.len() as i64);
    let (mx, my) = ratios
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), (x, y)| (a + *x, b + *y));
    let (mx, my) = (mx / len, my / len);
    let (sxy, sxx) = ratios
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), (x, y)| {
            (a + (*x - mx) * (*y - my), b + (*x - mx) * (*x - mx))
        });
    let slope = if sxx > T::zero() {
        sxy / sxx
    } else {
        T::zero()
    };
    let intercept = my - slope * mx;
    let spread = ratios.iter().fold(T::zero(), |a, (x, y)| {
        a.max((*y - (intercept + slope * *x)).abs())
    });
    let radius = if spread <= T::of(0.05) * my && intercept > T::zero() {
        intercept
    } else {
        let sum = tail.iter().fold(T::zero(), |a, (n, r)| {
            a + r.powf(-T::one() / T::int(*n as i64))
        });
        sum / T::int(tail.len() as i64)
    };
    Ok(radius * series.scale())
}

/// `ψ(x) = g*(λx) + λ²/4` for the normalized solution `g*` with `g₁ = −1`,
/// by unwinding the `+` branch from the series; `None` once a radicand
/// turns negative (beyond the branch point).
fn psi<T: Scalar>(ms: &ModelSolution<T>, lam: T, x: T, trust: T) -> Option<T> {
    let to_w = -Complex::new(T::one(), T::zero()) / ms.g1;
    let quarter = lam * lam / T::of(4.0);
    let mut y = lam * x;
    let mut levels = 0;
    while y > trust {
        y *= lam;
        levels += 1;
    }
    let mut v = ms.eval(to_w * Complex::new(y, T::zero())).re;
    for _ in 0..levels {
        let r = v + quarter;
        if r < T::zero() {
            return None;
        }
        v = -lam / T::of(2.0) + r.sqrt();
    }
    Some(v + quarter)
}

/// Branch radius `r̂`: the root of `g(w) + λ/2` on the ray where `g` is
/// real and decreasing, by bisection on `g(λw) + λ²/4`, for real
/// `λ ∈ (0, 1)`. A general `g₁` is handled by the scaling `w ↦ −g₁w`.
pub fn find_rhat<T: Scalar>(ms: &ModelSolution<T>, tol: T) -> Result<T> {
    let lam = ms.lambda.re;
    if !ms.lambda.im.is_zero() || lam <= T::zero() || lam >= T::one() {
        return Err(Error::Invalid(
            "branch radius search needs real λ in (0, 1)".into(),
        ));
    }
    if ms.g1.is_zero() {
        return Err(Error::Invalid("g₁ = 0 gives the zero solution".into()));
    }
    let m = ms.g1.norm();
    let est = estimate_radius(&ms.series)? * m;
    let trust = (ms.radius_lower_bound * m).min(est / T::of(2.0));
    let mut lo = trust;
    let mut hi = est * T::of(1.2).min((T::one() + T::one() / lam) / T::of(2.0));
    let positive = |x: T| psi(ms, lam, x, trust).is_some_and(|p| p > T::zero());
    if !positive(lo) || positive(hi) {
        return Err(Error::NoSignChange {
            lo: lo.f64(),
            hi: hi.f64(),
        });
    }
    for _ in 0..400 {
        let mid = (lo + hi) / T::of(2.0);
        if positive(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= (tol * T::of(1e-3)).min(T::epsilon() * T::of(4.0) * hi) {
            break;
        }
    }
    Ok(lo / m)
}

/// `G(v) = g(v^N)`, which satisfies `G(bv) = λG(v) + G(v)²` for `b^N = λ`.
pub fn symmetry_lift<T: Scalar>(ms: &ModelSolution<T>, n: usize) -> Result<PowerSeries<T>> {
    if n == 0 {
        return Err(Error::Invalid("lift order must be at least 1".into()));
    }
    let src = ms.series.scaled_coeffs();
    let mut coeffs = vec![Complex::zero(); (src.len() - 1) * n + 1];
    for (k, a) in src.iter().enumerate() {
        coeffs[k * n] = *a;
    }
    let scale = ms.series.scale().powf(T::one() / T::int(n as i64));
    Ok(PowerSeries::with_scale(Complex::zero(), scale, 0, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn half(n: usize) -> ModelSolution<f64> {
        model_series(cx(0.5, 0.0), cx(-1.0, 0.0), n).unwrap()
    }

    /// `g(λw) − λg(w) − g(w)²` coefficient by coefficient, in the scaled variable.
    fn functional_residual(ms: &ModelSolution<f64>) -> f64 {
        let a = ms.series.scaled_coeffs();
        let n = a.len() - 1;
        let mut worst: f64 = 0.0;
        for j in 1..=n {
            let mut sq = Complex::zero();
            for k in 1..j {
                sq += a[k] * a[j - k];
            }
            let r = a[j] * ms.lambda.powu(j as u32) - ms.lambda * a[j] - sq;
            worst = worst.max(r.norm());
        }
        worst
    }

    #[test]
    fn first_coefficients() {
        let ms = half(200);
        assert_eq!(ms.series.coeff(2), cx(-4.0, 0.0));
        assert!(
            (ms.series.coeff(3) - cx(-64.0 / 3.0, 0.0)).norm() <= 4.0 * f64::EPSILON * 64.0 / 3.0
        );
        assert_eq!(ms.series.scale(), 1.0 / 16.0);
        assert!(functional_residual(&ms) <= 1e-10);
    }

    #[test]
    fn negative_coefficients_and_zero_solution() {
        let ms = half(120);
        assert!((1..=120).all(|n| ms.series.coeff(n).re < 0.0));
        let z = model_series(cx::<f64>(0.5, 0.0), cx(0.0, 0.0), 30).unwrap();
        assert!(z.series.scaled_coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn majorant_values() {
        assert_eq!(
            majorant_bound(cx::<f64>(0.5, 0.0), cx(-1.0, 0.0)).unwrap(),
            1.0 / 16.0
        );
        assert_eq!(
            majorant_bound(cx::<f64>(0.5, 0.0), cx(-2.0, 0.0)).unwrap(),
            1.0 / 32.0
        );
    }

    #[test]
    fn geometric_radius() {
        let r: f64 = 0.37;
        let s = PowerSeries::<f64>::taylor((0..100).map(|n| cx(r.powi(n), 0.0)).collect());
        assert!((estimate_radius(&s).unwrap() - 1.0 / r).abs() < 0.01 / r);
        let z = PowerSeries::<f64>::taylor(vec![cx(1.0, 0.0); 10]);
        assert!(matches!(
            estimate_radius(&z),
            Err(Error::InsufficientCoefficients { .. })
        ));
    }

    #[test]
    fn branch_radius_for_half() {
        let ms = half(400);
        let est = estimate_radius(&ms.series).unwrap();
        let r = find_rhat(&ms, 1e-12).unwrap();
        assert!(r >= 1.0 / 16.0);
        assert!((r - est).abs() <= 1e-3 * r, "{r} {est}");
        let psi_val = psi(&ms, 0.5, r, ms.radius_lower_bound).unwrap();
        assert!(psi_val.abs() <= 1e-8);
    }

    #[test]
    fn branch_radius_small_lambda() {
        let ms = model_series(cx::<f64>(0.3, 0.0), cx(-1.0, 0.0), 400).unwrap();
        let r = find_rhat(&ms, 1e-12).unwrap();
        assert!(r > majorant_bound(cx(0.3, 0.0), cx(-1.0, 0.0)).unwrap());
    }

    #[test]
    fn lift_satisfies_rotated_equation() {
        let ms = model_series(cx::<f64>(0.25, 0.0), cx(-1.0, 0.0), 200).unwrap();
        assert_eq!(symmetry_lift(&ms, 1).unwrap(), ms.series);
        let lift = symmetry_lift(&ms, 2).unwrap();
        let b = cx::<f64>(0.5, 0.0);
        for v in [cx::<f64>(0.05, 0.02), cx(-0.03, 0.1), cx(0.0, -0.12)] {
            let (g, gb) = (lift.eval_unchecked(v), lift.eval_unchecked(b * v));
            assert!((gb - 0.25 * g - g * g).norm() <= 1e-8);
        }
        let r = estimate_radius(&lift).unwrap();
        let r1 = estimate_radius(&ms.series).unwrap();
        assert!((r - r1.sqrt()).abs() < 1e-2 * r);
    }
}
