use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::equation::{AbelNormalization, Side};
use crate::error::{Error, Result};
use crate::picard::operator::{iterate, StripOperator};
use crate::picard::strip::{Lattice, StripDomain, StripFunction, Truncation};
use crate::scalar::{to_pair, Cplx, Scalar};

/// Data of `F(ζ) = ζ + 1 + Σ_{j≥1} c_j ζ^{−j}` together with the chosen
/// asymptotic constant `α` and the decay exponent `δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbelNormalForm<T: Scalar> {
    pub m: usize,
    /// `c[j]`; `c[0]` is unused.
    pub c: Vec<Cplx<T>>,
    pub alpha: Cplx<T>,
    pub beta: Cplx<T>,
    pub delta: T,
}

impl<T: Scalar> AbelNormalForm<T> {
    pub fn new(m: usize, c: Vec<Cplx<T>>, alpha: Cplx<T>, beta: Cplx<T>, delta: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::Invalid("m ≥ 1".into()));
        }
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::Invalid("δ must lie in (0, 1)".into()));
        }
        let cm = c.get(m).copied().unwrap_or_else(Complex::zero);
        let expected = if m == 1 {
            cm
        } else {
            cm * T::int(m as i64) / T::int(m as i64 - 1)
        };
        if (beta - expected).norm() > T::coeff_tol() * T::one().max(expected.norm()) {
            return Err(Error::Invalid(format!(
                "β = {:?} but the normal form needs {:?}",
                to_pair(beta),
                to_pair(expected)
            )));
        }
        Ok(AbelNormalForm {
            m,
            c,
            alpha,
            beta,
            delta,
        })
    }

    pub fn from_normalization(n: &AbelNormalization<T>, alpha: Cplx<T>, delta: T) -> Result<Self> {
        Self::new(n.m, n.c.clone(), alpha, n.beta(), delta)
    }

    fn c(&self, j: usize) -> Cplx<T> {
        self.c.get(j).copied().unwrap_or_else(Complex::zero)
    }

    /// `F(ζ)` with the sum cut at `j_max`.
    pub fn apply(&self, zeta: Cplx<T>, j_max: usize) -> Cplx<T> {
        let inv = Complex::<T>::one() / zeta;
        let mut acc = Complex::zero();
        for j in (1..=j_max.min(self.c.len().saturating_sub(1))).rev() {
            acc = (acc + self.c(j)) * inv;
        }
        zeta + Complex::one() + acc
    }
}

/// `log x` continued through the left half-plane: `ln(−x) + iπ`.
pub fn left_log<T: Scalar>(x: Cplx<T>) -> Cplx<T> {
    (-x).ln() + Complex::new(T::zero(), T::PI())
}

/// `u − log(1+u)` without cancellation for small `u`.
fn u_minus_log1p<T: Scalar>(u: Cplx<T>) -> Cplx<T> {
    if u.norm() > T::of(0.1) {
        return u - (Complex::<T>::one() + u).ln();
    }
    // Σ_{j≥2} (−1)^j u^j / j
    let mut term = u * u;
    let mut acc = Complex::zero();
    let mut j = 2;
    loop {
        let t = term / T::int(j);
        if j % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
        if t.norm() <= T::epsilon() * acc.norm() || j > 400 {
            return acc;
        }
        term *= u;
        j += 1;
    }
}

/// `W ↦ Σ_{k≥1} D(z−k, W(z−k))` with
/// `D(x, W) = c₁/Y − c₁/x + Σ_{j≥2} c_j/Y^j + β(1/x − log(1 + 1/x))`
/// and `Y = x + α + β log x + W`; the three parts are kept apart for the
/// bound diagnostics. Beyond the padding the sum is replaced by the
/// integral of its leading asymptotics.
pub struct AbelOperator<T: Scalar> {
    nf: AbelNormalForm<T>,
    lattice: Lattice<T>,
    j_max: usize,
    /// Per node `(x, α + β log x, β(1/x − log(1+1/x)))`.
    fixed: Vec<(Cplx<T>, Cplx<T>, Cplx<T>)>,
    /// Per line, tail sums of the three parts.
    tails: Vec<[Cplx<T>; 3]>,
}

impl<T: Scalar> AbelOperator<T> {
    pub fn new(
        nf: &AbelNormalForm<T>,
        domain: &StripDomain<T>,
        padding: usize,
        j_max: usize,
    ) -> Result<Self> {
        if nf.m != 1 {
            return Err(Error::Invalid(
                "the strip operator covers m = 1 only".into(),
            ));
        }
        if domain.side != Side::Left {
            return Err(Error::Invalid(
                "the parabolic operator acts on a left strip".into(),
            ));
        }
        let lattice = Lattice::new(domain, padding);
        let fixed = lattice
            .nodes
            .iter()
            .map(|&x| {
                (
                    x,
                    nf.alpha + nf.beta * left_log(x),
                    nf.beta * u_minus_log1p(Complex::<T>::one() / x),
                )
            })
            .collect();
        let (c1, c2, a, b) = (nf.c(1), nf.c(2), nf.alpha, nf.beta);
        let half = T::of(0.5);
        // Leading terms of each part: (A_i + B_i log x)/x²; their sum over
        // x − 1, x − 2, … is about −(A_i + B_i + B_i log x_m)/x_m.
        let parts = [
            (-c1 * a, -c1 * b),
            (c2, Complex::zero()),
            (b * half, Complex::zero()),
        ];
        let tails = lattice
            .lines
            .iter()
            .map(|line| {
                let xm = lattice.nodes[line.end - 1] - half;
                let l = left_log(xm);
                parts.map(|(ai, bi)| -(ai + bi + bi * l) / xm)
            })
            .collect();
        Ok(AbelOperator {
            nf: nf.clone(),
            lattice,
            j_max,
            fixed,
            tails,
        })
    }

    fn increments(&self, w: &[Cplx<T>]) -> Vec<[Cplx<T>; 3]> {
        let c1 = self.nf.c(1);
        w.par_iter()
            .zip(&self.fixed)
            .map(|(&wi, &(x, shift, d3))| {
                let y = x + shift + wi;
                let inv = Complex::<T>::one() / y;
                let d1 = c1 * inv - c1 / x;
                let mut d2: Cplx<T> = Complex::zero();
                for j in (2..=self.j_max).rev() {
                    d2 = (d2 + self.nf.c(j)) * inv;
                }
                [d1, d2 * inv, d3]
            })
            .collect()
    }

    /// The three partial sums `T₁[W], T₂[W], T₃[W]` at every node.
    pub fn parts(&self, w: &[Cplx<T>]) -> [Vec<Cplx<T>>; 3] {
        let d = self.increments(w);
        [0, 1, 2].map(|p| {
            let dp: Vec<Cplx<T>> = d.iter().map(|v| v[p]).collect();
            let tails: Vec<Cplx<T>> = self.tails.iter().map(|t| t[p]).collect();
            self.lattice.suffix_sums(&dp, &tails, false)
        })
    }

    /// `Y(x) = x + α + β log x + W(x)` at node `i`.
    pub fn y_at(&self, i: usize, w: Cplx<T>) -> Cplx<T> {
        let (x, shift, _) = self.fixed[i];
        x + shift + w
    }
}

impl<T: Scalar> StripOperator<T> for AbelOperator<T> {
    fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    fn center(&self, _i: usize) -> Cplx<T> {
        Complex::zero()
    }

    fn radius(&self, i: usize) -> T {
        self.lattice.nodes[i].norm().powf(self.nf.delta - T::one())
    }

    fn apply(&self, w: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        let [a, b, c] = self.parts(w);
        Ok(a.iter()
            .zip(&b)
            .zip(&c)
            .map(|((x, y), z)| *x + *y + *z)
            .collect())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AbelOptions<T: Scalar> {
    pub j_max: usize,
    /// Unit steps of padding beyond the grid before the asymptotic tail.
    pub padding: usize,
    pub max_iter: usize,
    pub tol: T,
}

impl<T: Scalar> Default for AbelOptions<T> {
    fn default() -> Self {
        AbelOptions {
            j_max: 20,
            padding: 20_000,
            max_iter: 200,
            tol: T::of(1e-12).max(T::tol_floor() * T::tol_floor()),
        }
    }
}

/// Largest `|T_i(z)| / (⅓|z|^{−1+δ})` over the grid for each part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbelBoundChecks {
    pub ratios: [f64; 3],
}

impl AbelBoundChecks {
    pub fn pass(&self) -> bool {
        self.ratios.iter().all(|&r| r <= 1.0)
    }
}

#[derive(Clone, Debug)]
pub struct AbelSolution<T: Scalar> {
    /// `W` on the grid; residuals are `|Y(z+1) − F(Y(z))|`.
    pub w: StripFunction<T>,
    pub nf: AbelNormalForm<T>,
    /// `Y = z + α + β log z + W` on the grid.
    pub y: Vec<Cplx<T>>,
    pub checks: AbelBoundChecks,
}

impl<T: Scalar> AbelSolution<T> {
    /// `sup |W(z)|·|z|^{1−δ}` over the grid.
    pub fn bound_ratio(&self) -> T {
        let e = T::one() - self.nf.delta;
        self.w
            .domain
            .grid()
            .iter()
            .zip(&self.w.values)
            .fold(T::zero(), |m, (z, w)| m.max(w.norm() * z.norm().powf(e)))
    }
}

/// Fixed point of the parabolic operator on a left strip (`m = 1`).
pub fn abel_solve<T: Scalar>(
    nf: &AbelNormalForm<T>,
    domain: &StripDomain<T>,
    opts: &AbelOptions<T>,
) -> Result<AbelSolution<T>> {
    let op = AbelOperator::new(nf, domain, opts.padding, opts.j_max)?;
    let it = iterate(&op, op.initial(), opts.max_iter, opts.tol, |_| Ok(()))?;
    let lat = op.lattice();
    let mut values = Vec::with_capacity(domain.grid().len());
    let mut y = Vec::with_capacity(values.capacity());
    let mut residuals = Vec::with_capacity(values.capacity());
    for (g, &n) in lat.grid_node.iter().enumerate() {
        let w = it.values[n];
        let z = domain.grid()[g];
        let bound = z.norm().powf(nf.delta - T::one());
        if w.norm() > bound {
            return Err(Error::BoundViolation {
                at: to_pair(z),
                value: w.norm().f64(),
                bound: bound.f64(),
            });
        }
        let yz = op.y_at(n, w);
        values.push(w);
        y.push(yz);
        residuals.push(
            lat.inward(n)
                .map(|m| (op.y_at(m, it.values[m]) - nf.apply(yz, opts.j_max)).norm()),
        );
    }
    let [p1, p2, p3] = op.parts(&it.values);
    let third = T::one() / T::of(3.0);
    let mut ratios = [0.0f64; 3];
    for (g, &n) in lat.grid_node.iter().enumerate() {
        let b = third * domain.grid()[g].norm().powf(nf.delta - T::one());
        for (r, p) in ratios.iter_mut().zip([&p1, &p2, &p3]) {
            *r = r.max((p[n].norm() / b).f64());
        }
    }
    Ok(AbelSolution {
        w: StripFunction {
            domain: domain.clone(),
            values,
            asymptote: Complex::zero(),
            truncation: Truncation {
                k: opts.padding,
                j: opts.j_max,
            },
            iterations: it.iterations,
            last_step: it.last_step,
            residuals,
        },
        nf: nf.clone(),
        y,
        checks: AbelBoundChecks { ratios },
    })
}

/// `F^{∘n}(ζ)` for the truncated normal form.
pub fn iterate_normal_form<T: Scalar>(
    nf: &AbelNormalForm<T>,
    zeta: Cplx<T>,
    n: usize,
    j_max: usize,
) -> Cplx<T> {
    (0..n).fold(zeta, |z, _| nf.apply(z, j_max))
}

/// Smallest `|Y|` in the stored solution; `F` is only used where this is
/// comfortably above 1.
pub fn min_modulus<T: Scalar>(y: &[Cplx<T>]) -> T {
    y.iter().fold(T::infinity(), |m, v| m.min(v.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::{abel_normalize, RationalMap};
    use crate::scalar::cx;

    fn nf(src: &str, alpha: f64) -> AbelNormalForm<f64> {
        let r = RationalMap::parse(src).unwrap();
        let n = abel_normalize(&r, cx(0.0, 0.0), 20, 1e-12).unwrap();
        AbelNormalForm::from_normalization(&n, cx(alpha, 0.0), 0.5).unwrap()
    }

    #[test]
    fn log_series_matches_direct_formula() {
        for u in [cx(0.02, 0.01), cx(-0.05, 0.0), cx(0.3, -0.2)] {
            let direct = u - (cx::<f64>(1.0, 0.0) + u).ln();
            assert!((u_minus_log1p(u) - direct).norm() < 1e-15);
        }
    }

    #[test]
    fn left_log_is_continuous_across_the_axis() {
        let a: Cplx<f64> = left_log(cx(-5.0, 1e-9));
        let b = left_log(cx(-5.0, -1e-9));
        assert!((a - b).norm() < 1e-9);
        assert!(
            (left_log(cx::<f64>(-5.0, 0.0)) - cx::<f64>(5f64.ln(), std::f64::consts::PI)).norm()
                < 1e-15
        );
    }

    #[test]
    fn exact_translation_solves_with_zero_correction() {
        let f = nf("y/(1+y)", 0.7);
        let d = StripDomain::lattice(5.0, 1.0, Side::Left, 2, 3).unwrap();
        let s = abel_solve(
            &f,
            &d,
            &AbelOptions {
                padding: 50,
                ..AbelOptions::default()
            },
        )
        .unwrap();
        assert!(s.w.values.iter().all(|w| w.norm() == 0.0));
        for (z, y) in d.grid().iter().zip(&s.y) {
            assert!((y - (z + 0.7)).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_data_gives_zero_fixed_point() {
        let f =
            AbelNormalForm::new(1, vec![cx(0.0, 0.0); 4], cx(0.0, 0.0), cx(0.0, 0.0), 0.5).unwrap();
        let d = StripDomain::lattice(3.0, 0.5, Side::Left, 1, 2).unwrap();
        let s = abel_solve(
            &f,
            &d,
            &AbelOptions {
                padding: 10,
                ..AbelOptions::default()
            },
        )
        .unwrap();
        assert_eq!(s.bound_ratio(), 0.0);
    }

    #[test]
    fn beta_invariant_is_enforced() {
        assert!(AbelNormalForm::new(
            1,
            vec![cx(0.0, 0.0), cx(1.0, 0.0)],
            cx(0.0, 0.0),
            cx(0.0, 0.0),
            0.5
        )
        .is_err());
        assert!(
            AbelNormalForm::new(2, vec![cx(0.0, 0.0); 3], cx(0.0, 0.0), cx(0.0, 0.0), 0.5).is_ok()
        );
        assert!(
            AbelNormalForm::new(1, vec![cx(0.0, 0.0); 3], cx(0.0, 0.0), cx(0.0, 0.0), 1.5).is_err()
        );
    }

    #[test]
    fn quadratic_parabolic_map_on_a_moderate_strip() {
        let f = nf("y + y^2", 0.0);
        let d = StripDomain::lattice(50.0, 1.0, Side::Left, 2, 4).unwrap();
        let s = abel_solve(
            &f,
            &d,
            &AbelOptions {
                padding: 20_000,
                ..AbelOptions::default()
            },
        )
        .unwrap();
        assert!(s.bound_ratio() <= 1.0);
        assert!(s.w.max_residual() < 1e-6, "{}", s.w.max_residual());
        // Back in the original coordinate y = −1/Y, one step of the map.
        for g in 0..d.grid().len() {
            if g % d.columns < d.per_unit {
                continue;
            }
            let y0 = -1.0 / s.y[g];
            let y1 = -1.0 / s.y[g - d.per_unit];
            assert!((y1 - (y0 + y0 * y0)).norm() < 1e-9);
        }
    }
}
