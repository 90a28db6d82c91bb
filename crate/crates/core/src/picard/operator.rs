use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::equation::{coeff_bound_check, lambda_pow, EquationSpec, Side};
use crate::error::{Error, Result};
use crate::picard::strip::{Lattice, StripDomain, StripFunction, Truncation};
use crate::scalar::{is_finite, to_pair, Cplx, Scalar};

/// A map on functions sampled at the nodes of a [`Lattice`], together with
/// the ball it is meant to contract.
pub trait StripOperator<T: Scalar>: Sync {
    fn lattice(&self) -> &Lattice<T>;
    /// Center of the ball at node `i` (and the starting iterate).
    fn center(&self, i: usize) -> Cplx<T>;
    /// Radius of the ball at node `i`.
    fn radius(&self, i: usize) -> T;
    /// One Jacobi sweep: every output node reads only the input iterate.
    fn apply(&self, w: &[Cplx<T>]) -> Result<Vec<Cplx<T>>>;

    fn initial(&self) -> Vec<Cplx<T>> {
        (0..self.lattice().len()).map(|i| self.center(i)).collect()
    }
}

/// Result of plain Picard iteration.
#[derive(Clone, Debug)]
pub struct Iterated<T: Scalar> {
    pub values: Vec<Cplx<T>>,
    pub iterations: usize,
    pub last_step: T,
}

pub(crate) fn sup_diff<T: Scalar>(a: &[Cplx<T>], b: &[Cplx<T>]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).norm()))
}

/// Iterates `w ← T[w]` from `init` until the sup-norm step drops below
/// `tol`. `check` runs on every iterate; three consecutive non-shrinking
/// steps are reported as [`Error::NonContraction`].
pub fn iterate<T: Scalar, O: StripOperator<T> + ?Sized>(
    op: &O,
    init: Vec<Cplx<T>>,
    max_iter: usize,
    tol: T,
    check: impl Fn(&[Cplx<T>]) -> Result<()>,
) -> Result<Iterated<T>> {
    let mut w = init;
    let mut prev = T::infinity();
    let mut growing = 0;
    for it in 1..=max_iter {
        let next = op.apply(&w)?;
        if next.iter().any(|v| !is_finite(*v)) {
            return Err(Error::Blowup { step: it });
        }
        let step = sup_diff(&next, &w);
        check(&next)?;
        w = next;
        if step < tol {
            return Ok(Iterated {
                values: w,
                iterations: it,
                last_step: step,
            });
        }
        if step >= prev {
            growing += 1;
            if growing >= 3 {
                return Err(Error::NonContraction {
                    lipschitz: (step / prev).f64(),
                });
            }
        } else {
            growing = 0;
        }
        prev = step;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_step: prev.f64(),
    })
}

/// Rejects iterates that leave `|w − center| ≤ radius`.
pub fn ball_check<'a, T: Scalar, O: StripOperator<T> + ?Sized>(
    op: &'a O,
) -> impl Fn(&[Cplx<T>]) -> Result<()> + 'a {
    move |w: &[Cplx<T>]| {
        for (i, v) in w.iter().enumerate() {
            let d = (*v - op.center(i)).norm();
            if d > op.radius(i) {
                return Err(Error::BallExit {
                    at: to_pair(op.lattice().nodes[i]),
                    distance: d.f64(),
                });
            }
        }
        Ok(())
    }
}

/// `T[w](z) = α + Σ_{k≥1} Σ_j c_j(z−k) λ^{(j−1)(z−k)−1} w(z−k)^j` on the
/// left, and `α − Σ_{k≥0} Σ_j c_j(z+k) λ^{(j−1)(z+k)−1} w(z+k)^j` on the
/// right, cut after the lattice padding.
pub struct PicardOperator<T: Scalar> {
    lattice: Lattice<T>,
    side: Side,
    alpha: Cplx<T>,
    ball: T,
    /// Per node, `C_j = c_j λ^{(j−1)x−1}` for `j = 2..=J`.
    weights: Vec<Vec<Cplx<T>>>,
    truncation: Truncation,
}

/// Knobs shared by the strip solvers.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions<T: Scalar> {
    pub truncation: Truncation,
    pub max_iter: usize,
    pub tol: T,
    /// Radius `b` of the ball `|w − α| ≤ b`.
    pub ball: T,
    /// Growth rate for the coefficient hypothesis; checked when given.
    pub nu: Option<T>,
    /// Largest padding tried when `truncation.k` is automatic.
    pub k_cap: usize,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions {
            truncation: Truncation::default(),
            max_iter: 200,
            tol: T::of(1e-12).max(T::tol_floor() * T::tol_floor()),
            ball: T::one(),
            nu: None,
            k_cap: 5000,
        }
    }
}

fn node_weights<T: Scalar>(
    eq: &EquationSpec<T>,
    x: Cplx<T>,
    j_max: usize,
    cached: Option<&[Cplx<T>]>,
) -> Result<Vec<Cplx<T>>> {
    let owned;
    let c = match cached {
        Some(c) => c,
        None => {
            owned = eq.c_values(x, j_max).map_err(|e| match e {
                Error::Singular { .. } => Error::Pole { at: to_pair(x) },
                other => other,
            })?;
            &owned
        }
    };
    let lam = eq.lambda();
    Ok((2..=j_max)
        .map(|j| {
            if c[j].is_zero() {
                Complex::zero()
            } else {
                c[j] * lambda_pow(lam, x * T::int(j as i64 - 1) - T::one())
            }
        })
        .collect())
}

fn weight_bound<T: Scalar>(weights: &[Cplx<T>], r: T) -> T {
    weights
        .iter()
        .enumerate()
        .fold(T::zero(), |s, (k, c)| s + c.norm() * r.powi(k as i32 + 2))
}

impl<T: Scalar> PicardOperator<T> {
    pub fn new(
        eq: &EquationSpec<T>,
        alpha: Cplx<T>,
        domain: &StripDomain<T>,
        opts: &SolveOptions<T>,
    ) -> Result<Self> {
        let lam = eq.lambda().norm();
        match domain.side {
            Side::Left if lam <= T::one() => {
                return Err(Error::Invalid(format!(
                    "left strip needs |λ| > 1, got {}",
                    lam.f64()
                )))
            }
            Side::Right if lam >= T::one() => {
                return Err(Error::Invalid(format!(
                    "right strip needs |λ| < 1, got {}",
                    lam.f64()
                )))
            }
            _ => {}
        }
        if let Some(nu) = opts.nu {
            let rep = coeff_bound_check(eq, nu, domain.rho, domain.sigma, domain.side, 64)?;
            if let Some(at) = rep.singular_at {
                return Err(Error::Pole { at });
            }
            if !rep.pass {
                return Err(Error::BoundViolation {
                    at: rep.worst_at,
                    value: rep.max_ratio,
                    bound: 1.0,
                });
            }
        }
        let j_max = opts.truncation.j.max(2);
        let constant = if eq.is_constant() {
            Some(eq.c_values(Complex::zero(), j_max)?)
        } else {
            None
        };
        let k = if opts.truncation.k > 0 {
            opts.truncation.k
        } else {
            Self::pick_padding(eq, alpha, domain, opts, j_max, constant.as_deref())?
        };
        let lattice = Lattice::new(domain, k);
        let weights = lattice
            .nodes
            .par_iter()
            .map(|&x| node_weights(eq, x, j_max, constant.as_deref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(PicardOperator {
            lattice,
            side: domain.side,
            alpha,
            ball: opts.ball,
            weights,
            truncation: Truncation { k, j: j_max },
        })
    }

    /// Smallest padding after which the remaining terms, bounded on the
    /// ball and summed geometrically, stay below `tol/10`.
    fn pick_padding(
        eq: &EquationSpec<T>,
        alpha: Cplx<T>,
        domain: &StripDomain<T>,
        opts: &SolveOptions<T>,
        j_max: usize,
        cached: Option<&[Cplx<T>]>,
    ) -> Result<usize> {
        let r = alpha.norm() + opts.ball;
        let lam = eq.lambda().norm();
        let base = if lam > T::one() { T::one() / lam } else { lam };
        let (dir, far) = match domain.side {
            Side::Left => (
                -T::one(),
                -(domain.rho + T::int((domain.columns / domain.per_unit) as i64)),
            ),
            Side::Right => (
                T::one(),
                domain.rho + T::int((domain.columns / domain.per_unit) as i64),
            ),
        };
        let mut prev: Option<T> = None;
        for k in 1..=opts.k_cap {
            let mut t = T::zero();
            for &im in domain.rows() {
                let x = Complex::new(far + dir * T::int(k as i64), im);
                t = t.max(weight_bound(&node_weights(eq, x, j_max, cached)?, r));
            }
            let q = match prev {
                Some(p) if p > T::zero() => (t / p).max(base),
                _ => base,
            };
            prev = Some(t);
            if q < T::one() && t / (T::one() - q) < opts.tol / T::of(10.0) {
                return Ok(k);
            }
        }
        Ok(opts.k_cap)
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    fn increments(&self, w: &[Cplx<T>]) -> Vec<Cplx<T>> {
        w.par_iter()
            .zip(&self.weights)
            .map(|(&wi, cs)| {
                let mut acc: Cplx<T> = Complex::zero();
                for c in cs.iter().rev() {
                    acc = acc * wi + *c;
                }
                acc * wi * wi
            })
            .collect()
    }
}

impl<T: Scalar> StripOperator<T> for PicardOperator<T> {
    fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    fn center(&self, _i: usize) -> Cplx<T> {
        self.alpha
    }

    fn radius(&self, _i: usize) -> T {
        self.ball
    }

    fn apply(&self, w: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        let d = self.increments(w);
        let tails = vec![Complex::zero(); self.lattice.lines.len()];
        let out = match self.side {
            Side::Left => self
                .lattice
                .suffix_sums(&d, &tails, false)
                .into_iter()
                .map(|s| self.alpha + s)
                .collect(),
            Side::Right => self
                .lattice
                .suffix_sums(&d, &tails, true)
                .into_iter()
                .map(|s| self.alpha - s)
                .collect(),
        };
        Ok(out)
    }
}

/// `|w(z+1) − λ^{−z−1} F(z, λ^z w(z))|`, the equation residual measured in
/// the `w` scale (an upper bound for the `y`-scale residual on both strips).
pub fn scaled_residual<T: Scalar>(
    eq: &EquationSpec<T>,
    z: Cplx<T>,
    w: Cplx<T>,
    w_next: Cplx<T>,
) -> Result<T> {
    let lam = eq.lambda();
    let y = lambda_pow(lam, z) * w;
    let f = eq.rhs(z, y)?;
    Ok((w_next - f / lambda_pow(lam, z + T::one())).norm())
}

/// Fixed point of the Picard operator for `y(z+1) = F(z, y(z))` with
/// `y(z)λ^{−z} → α` on the strip.
pub fn picard_solve<T: Scalar>(
    eq: &EquationSpec<T>,
    alpha: Cplx<T>,
    domain: &StripDomain<T>,
    opts: &SolveOptions<T>,
) -> Result<StripFunction<T>> {
    let op = PicardOperator::new(eq, alpha, domain, opts)?;
    let it = iterate(&op, op.initial(), opts.max_iter, opts.tol, ball_check(&op))?;
    finish(eq, alpha, domain, &op, it)
}

pub(crate) fn finish<T: Scalar>(
    eq: &EquationSpec<T>,
    alpha: Cplx<T>,
    domain: &StripDomain<T>,
    op: &PicardOperator<T>,
    it: Iterated<T>,
) -> Result<StripFunction<T>> {
    let lat = &op.lattice;
    let values: Vec<Cplx<T>> = lat.grid_node.iter().map(|&n| it.values[n]).collect();
    let residuals = lat
        .grid_node
        .iter()
        .map(|&n| {
            let next = match domain.side {
                Side::Left => lat.inward(n),
                Side::Right => lat.outward(n),
            };
            next.map(|m| scaled_residual(eq, lat.nodes[n], it.values[n], it.values[m]))
                .transpose()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StripFunction {
        domain: domain.clone(),
        values,
        asymptote: alpha,
        truncation: op.truncation,
        iterations: it.iterations,
        last_step: it.last_step,
        residuals,
    })
}

/// Fitted decay `|w − α| ≤ C·|λ|^{(1−ε)·(∓Re z)}` along the grid rows.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayProfile {
    /// Smallest `C` that makes the bound hold at every grid point.
    pub constant: f64,
    /// Grid points where `|w − α|` grew by more than a factor 2 while
    /// moving away from the boundary.
    pub monotonicity_breaks: usize,
}

pub fn decay_profile<T: Scalar>(f: &StripFunction<T>, lambda: Cplx<T>, eps: f64) -> DecayProfile {
    let lam = lambda.norm().f64();
    let sgn = match f.domain.side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    let mut constant = 0.0f64;
    let mut breaks = 0;
    let floor = 1e3 * T::epsilon().f64();
    for r in 0..f.domain.rows().len() {
        let row = f.row(r);
        let pts = &f.domain.grid()[r * f.domain.columns..(r + 1) * f.domain.columns];
        for (k, (&w, &z)) in row.iter().zip(pts).enumerate() {
            let d = (w - f.asymptote).norm().f64();
            constant = constant.max(d / lam.powf((1.0 - eps) * sgn * z.re.f64()));
            if k >= f.domain.per_unit {
                let before = (row[k - f.domain.per_unit] - f.asymptote).norm().f64();
                if d > 2.0 * before + floor {
                    breaks += 1;
                }
            }
        }
    }
    DecayProfile {
        constant,
        monotonicity_breaks: breaks,
    }
}
