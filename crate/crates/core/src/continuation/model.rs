use num_complex::Complex;

use crate::continuation::chain::{Chain, ChainDynamics, ChainState, TIE};
use crate::continuation::path::{
    continue_along, loop_around, FunctionElement, MonodromyResult, PathSpec,
};
use crate::error::{Error, Result};
use crate::io::PlaneTag;
use crate::numerics::PowerSeries;
use crate::scalar::{to_pair, Cplx, Scalar};
use crate::surface::ModelSolution;

/// Branch choice for one backward step: `−λ/2 ± √(v + λ²/4)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Both preimages of `v` under `y ↦ y² + λy`, `+` root first.
pub fn model_preimages<T: Scalar>(lambda: Cplx<T>, v: Cplx<T>) -> [Cplx<T>; 2] {
    let half = lambda / T::of(2.0);
    let s = (v + half * half).sqrt();
    [-half + s, -half - s]
}

fn radicand_vanishes<T: Scalar>(lambda: Cplx<T>, v: Cplx<T>) -> bool {
    let r = v + lambda * lambda / T::of(4.0);
    r.norm() <= T::epsilon() * T::of(8.0) * (v.norm() + lambda.norm_sqr())
}

/// The preimage of `forward_value` nearest to `hint`.
pub fn step_backward_model<T: Scalar>(
    lambda: Cplx<T>,
    forward_value: Cplx<T>,
    hint: Cplx<T>,
) -> Result<Cplx<T>> {
    if radicand_vanishes(lambda, forward_value) {
        return Err(Error::BranchPoint {
            at: to_pair(forward_value),
            level: 0,
        });
    }
    let [p, m] = model_preimages(lambda, forward_value);
    let (dp, dm) = ((p - hint).norm(), (m - hint).norm());
    if (dp - dm).abs() <= T::of(TIE) * (p - m).norm() {
        return Err(Error::Tie {
            at: to_pair(hint),
            level: 0,
        });
    }
    Ok(if dp < dm { p } else { m })
}

/// Evaluates `g` at `λ^N w` and unwinds `N` backward steps with the given
/// signs; `signs[0]` selects the value at `w`, `signs[N−1]` the value at
/// `λ^{N−1} w`.
pub fn evaluate_sheet<T: Scalar>(
    lambda: Cplx<T>,
    g: &PowerSeries<T>,
    w: Cplx<T>,
    signs: &[Sign],
) -> Result<Cplx<T>> {
    let n = signs.len();
    let mut p = w;
    for _ in 0..n {
        p *= lambda;
    }
    let mut v = g.eval(p)?;
    for k in (0..n).rev() {
        p /= lambda;
        if radicand_vanishes(lambda, v) {
            return Err(Error::BranchPoint {
                at: to_pair(p),
                level: k,
            });
        }
        let [plus, minus] = model_preimages(lambda, v);
        v = if signs[k] == Sign::Plus { plus } else { minus };
    }
    Ok(v)
}

/// The model equation read in the `w`-plane: `deeper(w) = λw`, the base is
/// the series `g` inside `|w| ≤ trust`, candidates are the two preimages.
#[derive(Clone, Copy, Debug)]
pub struct ModelDynamics<'a, T: Scalar> {
    pub lambda: Cplx<T>,
    pub series: &'a PowerSeries<T>,
    pub trust: T,
}

impl<'a, T: Scalar> ModelDynamics<'a, T> {
    pub fn new(ms: &'a ModelSolution<T>) -> Self {
        ModelDynamics {
            lambda: ms.lambda,
            series: &ms.series,
            trust: ms.trust_radius(),
        }
    }
}

impl<T: Scalar> ChainDynamics<T> for ModelDynamics<'_, T> {
    fn plane(&self) -> PlaneTag {
        PlaneTag::WPlane
    }

    fn deeper(&self, p: Cplx<T>) -> Cplx<T> {
        p * self.lambda
    }

    fn trusted(&self, p: Cplx<T>) -> bool {
        p.norm() <= self.trust
    }

    fn base(&self, p: Cplx<T>) -> Result<Cplx<T>> {
        Ok(self.series.eval_unchecked(p))
    }

    fn candidates(&self, _p: Cplx<T>, v: Cplx<T>) -> Result<Vec<Cplx<T>>> {
        Ok(model_preimages(self.lambda, v).to_vec())
    }

    fn value_floor(&self) -> T {
        self.lambda.norm() / T::of(4.0)
    }
}

/// Chain for the sheet whose values at `w = 0` are `germ` (outermost
/// level first; the empty germ is `g` itself).
pub fn sheet_chain<'a, T: Scalar>(
    ms: &'a ModelSolution<T>,
    germ: &[Cplx<T>],
) -> Chain<ModelDynamics<'a, T>> {
    Chain::new(ModelDynamics::new(ms), germ.len())
}

/// The sheet's function element at `w = 0`.
pub fn sheet_origin<T: Scalar>(
    ms: &ModelSolution<T>,
    germ: &[Cplx<T>],
) -> Result<FunctionElement<T>> {
    let chain = sheet_chain(ms, germ);
    let zero = Complex::new(T::zero(), T::zero());
    let state: ChainState<T> = chain.state_from(zero, germ, T::of(1e-6))?;
    Ok(FunctionElement::new(PlaneTag::WPlane, state))
}

/// Continues the sheet radially from `0` to `w`.
pub fn sheet_element<T: Scalar>(
    ms: &ModelSolution<T>,
    germ: &[Cplx<T>],
    w: Cplx<T>,
) -> Result<FunctionElement<T>> {
    let chain = sheet_chain(ms, germ);
    let start = sheet_origin(ms, germ)?;
    continue_along(&PathSpec::segment(start.point(), w), &start, &chain)
}

/// Loops `loops` times around the ladder point `w_n` on a circle of radius
/// `radius_factor` times the gap to the nearest other ladder point, starting
/// on the sheet `germ` at the top of the circle.
pub fn monodromy<T: Scalar>(
    ms: &ModelSolution<T>,
    n: usize,
    radius_factor: T,
    germ: &[Cplx<T>],
    loops: u32,
    tol: T,
) -> Result<MonodromyResult<T>> {
    let center = ms.ladder_point(n)?;
    let gap = ms.ladder_gap(n)?;
    if radius_factor <= T::zero() || radius_factor >= T::one() {
        return Err(Error::Invalid("radius factor must lie in (0, 1)".into()));
    }
    let radius = radius_factor * gap;
    // Top of the circle, measured from the ray through the ladder.
    let dir = center / center.norm();
    let start = center + dir * Complex::new(T::zero(), radius);
    let chain = sheet_chain(ms, germ);
    let element = sheet_element(ms, germ, start)?;
    loop_around(&chain, &element, center, loops, tol)
}

/// Small loop around `w = 0` on the sheet `germ`.
pub fn origin_loop<T: Scalar>(
    ms: &ModelSolution<T>,
    germ: &[Cplx<T>],
    radius: T,
    tol: T,
) -> Result<MonodromyResult<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let chain = sheet_chain(ms, germ);
    let element = sheet_element(ms, germ, Complex::new(T::zero(), radius))?;
    loop_around(&chain, &element, zero, 1, tol)
}
