use num_complex::Complex;
use num_traits::{One, Zero};

use crate::equation::{expand_c, lambda_pow, EquationSpec};
use crate::error::{Error, Result};
use crate::scalar::{is_finite, Cplx, Scalar};

/// `w(z)` by stepping `w(x+1) = w(x) + Σ_j c_j(x) λ^{(j−1)x−1} w(x)^j`
/// through `K` unit steps, seeded with `w = α` at `z − K` when `|λ| > 1`
/// and at `z + K` (stepping backwards, one implicit solve per step) when
/// `|λ| < 1`. The `c_j` come from the expression-tree expansion, not the
/// series quotient the strip operator uses.
pub fn forward_telescope<T: Scalar>(
    eq: &EquationSpec<T>,
    alpha: Cplx<T>,
    z: Cplx<T>,
    k: usize,
    j_max: usize,
) -> Result<Cplx<T>> {
    let lam = eq.lambda();
    if (lam.norm() - T::one()).abs() <= T::epsilon() {
        return Err(Error::Invalid("telescoping needs |λ| ≠ 1".into()));
    }
    let exprs = expand_c(eq, j_max.max(2))?;
    let weights = |x: Cplx<T>| -> Result<Vec<Cplx<T>>> {
        exprs
            .iter()
            .map(|e| {
                let c = e.expr.eval(x)?;
                Ok(if c.is_zero() {
                    c
                } else {
                    c * lambda_pow(lam, x * T::int(e.j as i64 - 1) - T::one())
                })
            })
            .collect()
    };
    // Σ_j C_j w^j and its derivative, with weights[0] ↔ j = 2.
    let eval = |cs: &[Cplx<T>], w: Cplx<T>| {
        let mut p: Cplx<T> = Complex::zero();
        let mut dp: Cplx<T> = Complex::zero();
        for (i, c) in cs.iter().enumerate().rev() {
            let j = T::int(i as i64 + 2);
            p = p * w + *c;
            dp = dp * w + *c * j;
        }
        (p * w * w, dp * w)
    };
    let limit = T::of(1e6) * (T::one() + alpha.norm());
    let mut w = alpha;
    if lam.norm() > T::one() {
        for step in 0..k {
            let x = z - T::int((k - step) as i64);
            let (d, _) = eval(&weights(x)?, w);
            w += d;
            if !is_finite(w) || (w - alpha).norm() > limit {
                return Err(Error::Blowup { step: step + 1 });
            }
        }
    } else {
        for step in 0..k {
            let x = z + T::int((k - step - 1) as i64);
            let cs = weights(x)?;
            let target = w;
            // Solve v + D(x, v) = w(x+1) by Newton from v = w(x+1).
            let mut v = target;
            for _ in 0..60 {
                let (d, dd) = eval(&cs, v);
                let delta: Cplx<T> = (v + d - target) / (Complex::<T>::one() + dd);
                v -= delta;
                if delta.norm() <= T::epsilon() * T::of(4.0) * (T::one() + v.norm()) {
                    break;
                }
            }
            w = v;
            if !is_finite(w) || (w - alpha).norm() > limit {
                return Err(Error::Blowup { step: step + 1 });
            }
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn eq(src: &str) -> EquationSpec<f64> {
        EquationSpec::from_config(src).unwrap()
    }

    #[test]
    fn doubling_model() {
        let w =
            forward_telescope(&eq("lambda=2\na2=1"), cx(1.0, 0.0), cx(-10.0, 0.0), 30, 10).unwrap();
        let exact = ((2f64.powi(-10)).exp() - 1.0) * 1024.0;
        assert!((w - cx(exact, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn linear_equation_and_empty_sum() {
        assert_eq!(
            forward_telescope(&eq("lambda=3"), cx(0.4, 0.1), cx(-2.0, 0.5), 25, 6).unwrap(),
            cx(0.4, 0.1)
        );
        assert_eq!(
            forward_telescope(&eq("lambda=2\na2=1"), cx(1.0, 0.0), cx(-3.0, 0.0), 0, 6).unwrap(),
            cx(1.0, 0.0)
        );
    }

    #[test]
    fn backward_steps_satisfy_the_recursion() {
        let e = eq("lambda=0.5\na2=1");
        let z = cx(8.0, 0.3);
        let w0 = forward_telescope(&e, cx(-1.0, 0.0), z, 40, 6).unwrap();
        let w1 = forward_telescope(&e, cx(-1.0, 0.0), z + 1.0, 39, 6).unwrap();
        let y0 = lambda_pow(e.lambda(), z) * w0;
        let y1 = lambda_pow(e.lambda(), z + 1.0) * w1;
        assert!((y1 - (0.5 * y0 + y0 * y0)).norm() < 1e-15);
    }

    #[test]
    fn blowup_is_detected() {
        assert!(matches!(
            forward_telescope(&eq("lambda=2\na2=1"), cx(50.0, 0.0), cx(5.0, 0.0), 20, 4),
            Err(Error::Blowup { .. })
        ));
    }
}
