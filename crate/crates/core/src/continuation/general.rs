use crate::continuation::chain::{nearest, select, ChainDynamics, Selection};
use crate::equation::{lambda_pow, EquationSpec, Flavor, Side};
use crate::error::{Error, Result};
use crate::io::PlaneTag;
use crate::numerics::{poly_roots, Polynomial};
use crate::picard::forward_telescope;
use crate::scalar::{to_pair, Cplx, Scalar};

/// `y(z+1) = F(z, y(z))`.
pub fn step_forward<T: Scalar>(eq: &EquationSpec<T>, z: Cplx<T>, y: Cplx<T>) -> Result<Cplx<T>> {
    eq.rhs(z, y)
}

/// Every `y` with `F(z, y) = v`, i.e. the roots of `P(y) − v·Q(y)`.
pub fn preimages<T: Scalar>(
    eq: &EquationSpec<T>,
    z: Cplx<T>,
    v: Cplx<T>,
    tol: T,
) -> Result<Vec<Cplx<T>>> {
    let (p, den) = preimage_polynomial(eq, z, v)?;
    let p = p.trimmed(T::epsilon());
    if p.degree() == 0 {
        return Err(Error::Degenerate(format!(
            "F(z, ·) takes no value {:?} at z = {:?}",
            to_pair(v),
            to_pair(z)
        )));
    }
    let roots = poly_roots(&p, tol)?;
    // A preimage that is also a root of Q is a pole, not a solution.
    Ok(roots
        .into_iter()
        .map(|r| r.value)
        .filter(|&y| den.eval(y).norm() > T::epsilon() * T::of(64.0) * den.scale())
        .collect())
}

/// Preimage nearest to `hint`; ties abort.
pub fn step_backward<T: Scalar>(
    eq: &EquationSpec<T>,
    z: Cplx<T>,
    v: Cplx<T>,
    hint: Cplx<T>,
    tol: T,
) -> Result<Cplx<T>> {
    let cands = preimages(eq, z, v, tol)?;
    if cands.is_empty() {
        return Err(Error::Pole { at: to_pair(z) });
    }
    match select(&cands, hint) {
        Selection::Clear(i) => Ok(cands[i]),
        Selection::Unclear { tie: true, .. } => Err(Error::Tie {
            at: to_pair(z),
            level: 0,
        }),
        Selection::Unclear { .. } => Ok(cands[nearest(&cands, hint)]),
    }
}

/// A general equation read in the `z`-plane. The base is the telescoped
/// strip solution `λ^z w(z)` in `Re z ≤ −ρ` (`|λ| > 1`) or `Re z ≥ ρ`
/// (`|λ| < 1`); levels step one unit toward it.
#[derive(Clone, Debug)]
pub struct EquationDynamics<'a, T: Scalar> {
    pub eq: &'a EquationSpec<T>,
    pub alpha: Cplx<T>,
    pub rho: T,
    pub k: usize,
    pub j_max: usize,
    pub tol: T,
}

impl<T: Scalar> EquationDynamics<'_, T> {
    pub fn side(&self) -> Side {
        if self.eq.lambda().norm() > T::one() {
            Side::Left
        } else {
            Side::Right
        }
    }
}

impl<T: Scalar> ChainDynamics<T> for EquationDynamics<'_, T> {
    fn plane(&self) -> PlaneTag {
        PlaneTag::ZPlane
    }

    fn deeper(&self, p: Cplx<T>) -> Cplx<T> {
        match self.side() {
            Side::Left => p - T::one(),
            Side::Right => p + T::one(),
        }
    }

    fn trusted(&self, p: Cplx<T>) -> bool {
        match self.side() {
            Side::Left => p.re <= -self.rho,
            Side::Right => p.re >= self.rho,
        }
    }

    fn base(&self, p: Cplx<T>) -> Result<Cplx<T>> {
        let w = forward_telescope(self.eq, self.alpha, p, self.k, self.j_max)?;
        Ok(lambda_pow(self.eq.lambda(), p) * w)
    }

    fn candidates(&self, p: Cplx<T>, v: Cplx<T>) -> Result<Vec<Cplx<T>>> {
        match self.side() {
            Side::Left => Ok(vec![step_forward(self.eq, p - T::one(), v)?]),
            Side::Right => {
                let c = preimages(self.eq, p, v, self.tol)?;
                if c.is_empty() {
                    return Err(Error::Pole { at: to_pair(p) });
                }
                Ok(c)
            }
        }
    }
}

/// `P(y) − v·Q(y)` at `z`, together with `Q`. Exposed for callers that
/// select among more than two preimages themselves.
pub fn preimage_polynomial<T: Scalar>(
    eq: &EquationSpec<T>,
    z: Cplx<T>,
    v: Cplx<T>,
) -> Result<(Polynomial<T>, Polynomial<T>)> {
    let (num, den) = match eq.flavor() {
        Flavor::Autonomous(map) => (map.num().clone(), map.den().clone()),
        _ => eq.polys_at(z)?,
    };
    Ok((num.sub(&den.mul_scalar(v)), den))
}
