//! Simultaneous polynomial root finding (Aberth–Ehrlich) with clustering of
//! multiple roots. No deflation is performed.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numerics::poly::Polynomial;
use crate::scalar::{Cplx, Scalar};

/// A root together with the size of the cluster it represents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root<T: Scalar> {
    pub value: Cplx<T>,
    pub multiplicity: usize,
}

const MAX_ITER: usize = 500;

/// All complex roots of `p`, clustered by multiplicity.
///
/// Every returned value satisfies `|p(r)| ≤ tol · max|coeff| · max(1,|r|)^deg`.
pub fn poly_roots<T: Scalar>(p: &Polynomial<T>, tol: T) -> Result<Vec<Root<T>>> {
    let deg = p.degree();
    if p.is_zero() || deg == 0 {
        return Err(Error::Invalid("root finding needs degree ≥ 1".into()));
    }
    // Exact zero roots are split off without deflating anything else.
    let zeros = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    let reduced = Polynomial::new(p.coeffs()[zeros..].to_vec());
    let mut roots: Vec<Cplx<T>> = vec![Complex::zero(); zeros];
    if reduced.degree() >= 1 {
        roots.extend(aberth(&reduced)?);
    }
    let clusters = cluster(&roots);
    let mut out = Vec::with_capacity(clusters.len());
    for members in clusters {
        let m = members.len();
        let centroid = members.iter().fold(Complex::zero(), |a, &z| a + z) / T::int(m as i64);
        let value = if m > 1 {
            refine_multiple(p, centroid, m)
        } else {
            centroid
        };
        let bound = tol * p.scale() * T::one().max(value.norm()).powi(deg as i32);
        if p.eval(value).norm() > bound {
            return Err(Error::RootNonConvergence {
                iterations: MAX_ITER,
            });
        }
        out.push(Root {
            value,
            multiplicity: m,
        });
    }
    out.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// Roots listed with repetition according to multiplicity.
pub fn poly_roots_flat<T: Scalar>(p: &Polynomial<T>, tol: T) -> Result<Vec<Cplx<T>>> {
    Ok(poly_roots(p, tol)?
        .into_iter()
        .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
        .collect())
}

fn aberth<T: Scalar>(p: &Polynomial<T>) -> Result<Vec<Cplx<T>>> {
    let n = p.degree();
    let lead = p.leading().norm();
    // Fujiwara-type radius for the starting circle.
    let mut radius = T::zero();
    for k in 0..n {
        let r = (p.coeff(k).norm() / lead).powf(T::one() / T::int((n - k) as i64));
        radius = radius.max(r);
    }
    if radius == T::zero() {
        radius = T::one();
    }
    let two_pi = T::PI() + T::PI();
    let mut z: Vec<Cplx<T>> = (0..n)
        .map(|k| {
            let angle = two_pi * T::int(k as i64) / T::int(n as i64) + T::of(0.4);
            Complex::from_polar(radius, angle)
        })
        .collect();
    let eps = T::epsilon();
    let abs_coeffs: Vec<T> = p.coeffs().iter().map(|c| c.norm()).collect();
    let mut done = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut all_done = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (v, d) = p.eval_with_derivative(z[k]);
            // Rounding-level residual: stop refining this root.
            let az = z[k].norm();
            let noise = abs_coeffs
                .iter()
                .rev()
                .fold(T::zero(), |acc, &c| acc * az + c)
                * eps
                * T::of(4.0);
            if v.norm() <= noise {
                done[k] = true;
                continue;
            }
            let ratio = if d.is_zero() { v / T::of(1e-30) } else { v / d };
            let mut sum = Complex::zero();
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if !diff.is_zero() {
                        sum += diff.inv();
                    }
                }
            }
            let step = ratio / (Complex::new(T::one(), T::zero()) - ratio * sum);
            z[k] -= step;
            if step.norm() <= eps * T::of(4.0) * T::one().max(z[k].norm()) {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            return Ok(z);
        }
    }
    // Multiple roots converge linearly; accept if residuals are small and
    // let the caller's residual check decide.
    if z.iter().all(|r| r.re.is_finite() && r.im.is_finite()) {
        Ok(z)
    } else {
        Err(Error::RootNonConvergence {
            iterations: MAX_ITER,
        })
    }
}

/// Groups roots that belong to one multiple root. For each unassigned
/// root, the largest `m` is chosen such that it and its `m − 1` nearest
/// unassigned neighbours lie within the spread expected for an `m`-fold
/// root, `10 · eps^(1/m) · max(1, |c|)`, of their centroid `c`.
fn cluster<T: Scalar>(roots: &[Cplx<T>]) -> Vec<Vec<Cplx<T>>> {
    let eps = T::epsilon();
    let mut free: Vec<bool> = vec![true; roots.len()];
    let mut groups = Vec::new();
    for i in 0..roots.len() {
        if !free[i] {
            continue;
        }
        let mut near: Vec<(T, usize)> = (0..roots.len())
            .filter(|&j| j != i && free[j])
            .map(|j| ((roots[j] - roots[i]).norm(), j))
            .collect();
        near.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut chosen = vec![i];
        for m in (2..=near.len() + 1).rev() {
            let mut cand = vec![i];
            cand.extend(near[..m - 1].iter().map(|&(_, j)| j));
            let pts: Vec<Cplx<T>> = cand.iter().map(|&k| roots[k]).collect();
            let c = centroid(&pts);
            let thresh =
                T::of(10.0) * eps.powf(T::one() / T::int(m as i64)) * T::one().max(c.norm());
            if pts.iter().all(|&z| (z - c).norm() <= thresh) {
                chosen = cand;
                break;
            }
        }
        for &k in &chosen {
            free[k] = false;
        }
        groups.push(chosen.iter().map(|&k| roots[k]).collect());
    }
    groups
}

fn centroid<T: Scalar>(g: &[Cplx<T>]) -> Cplx<T> {
    g.iter().fold(Complex::zero(), |a, &z| a + z) / T::int(g.len() as i64)
}

/// Newton on the `(m−1)`-th derivative, where an `m`-fold root is simple.
fn refine_multiple<T: Scalar>(p: &Polynomial<T>, start: Cplx<T>, m: usize) -> Cplx<T> {
    let mut q = p.clone();
    for _ in 0..m - 1 {
        q = q.derivative();
    }
    let mut z = start;
    for _ in 0..50 {
        let (v, d) = q.eval_with_derivative(z);
        if d.is_zero() {
            break;
        }
        let step = v / d;
        let next = z - step;
        if p.eval(next).norm() > p.eval(z).norm() && step.norm() > T::epsilon() {
            break;
        }
        z = next;
        if step.norm() <= T::epsilon() * T::one().max(z.norm()) {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use crate::scalar::DoubleDouble;
    use num_traits::Float;

    #[test]
    fn model_fixed_points() {
        // y^2 + (λ − 1) y with λ = 1/2.
        let p = Polynomial::<f64>::from_real(&[0.0, -0.5, 1.0]);
        let r = poly_roots(&p, 1e-12).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].value.norm() < 1e-15);
        assert!((r[1].value - cx(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn imaginary_pair() {
        let p = Polynomial::<f64>::from_real(&[1.0, 0.0, 1.0]);
        let r = poly_roots(&p, 1e-12).unwrap();
        assert_eq!(r.len(), 2);
        assert!(
            (r[0].value - cx(0.0, -1.0)).norm() < 1e-14
                || (r[0].value - cx(0.0, 1.0)).norm() < 1e-14
        );
        assert!((r[0].value + r[1].value).norm() < 1e-14);
    }

    #[test]
    fn triple_root_is_clustered() {
        let p = Polynomial::<f64>::from_real(&[-1.0, 3.0, -3.0, 1.0]);
        let r = poly_roots(&p, 1e-12).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 3);
        assert!((r[0].value - cx(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn double_double_roots() {
        let p = Polynomial::<DoubleDouble>::from_real(&[2.0, 0.0, -1.0]);
        let r = poly_roots(&p, DoubleDouble::of(1e-28)).unwrap();
        let s2 = DoubleDouble::of(2.0).sqrt();
        assert!(r.iter().any(|x| (x.value.re - s2).abs().f64() < 1e-30));
    }

    #[test]
    fn degree_zero_rejected() {
        assert!(poly_roots(&Polynomial::<f64>::from_real(&[3.0]), 1e-12).is_err());
    }

    #[test]
    fn wilkinson_like_spread() {
        let roots: Vec<Cplx<f64>> = (1..=8).map(|k| cx(k as f64, 0.0)).collect();
        let p = Polynomial::from_roots(&roots);
        let r = poly_roots(&p, 1e-8).unwrap();
        assert_eq!(r.len(), 8);
        for (k, x) in r.iter().enumerate() {
            assert!((x.value - roots[k]).norm() < 1e-6);
        }
    }
}
