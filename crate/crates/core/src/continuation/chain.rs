use num_complex::Complex;

use crate::error::{Error, Result};
use crate::io::PlaneTag;
use crate::scalar::{is_finite, to_pair, Cplx, Scalar};

/// Deepest chain the evaluator will build before giving up.
pub const MAX_LEVELS: usize = 96;

/// A functional equation read as a chain of levels.
///
/// Level `k` sits at `p_k`, with `p_{k+1} = deeper(p_k)` moving toward a
/// region where `base` can be trusted. The value at level `k` is one of
/// `candidates(p_k, v_{k+1})`.
pub trait ChainDynamics<T: Scalar>: Sync {
    fn plane(&self) -> PlaneTag;
    fn deeper(&self, p: Cplx<T>) -> Cplx<T>;
    fn trusted(&self, p: Cplx<T>) -> bool;
    fn base(&self, p: Cplx<T>) -> Result<Cplx<T>>;
    fn candidates(&self, p: Cplx<T>, deeper_value: Cplx<T>) -> Result<Vec<Cplx<T>>>;
    /// Lower bound on the value scale used by the jump test.
    fn value_floor(&self) -> T {
        T::one()
    }
}

/// Values of every level at one point. `values.last()` comes from `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState<T: Scalar> {
    pub points: Vec<Cplx<T>>,
    pub values: Vec<Cplx<T>>,
}

impl<T: Scalar> ChainState<T> {
    pub fn point(&self) -> Cplx<T> {
        self.points[0]
    }

    pub fn value(&self) -> Cplx<T> {
        self.values[0]
    }

    pub fn depth(&self) -> usize {
        self.values.len() - 1
    }
}

/// Why a proposed step was refused.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rejection {
    /// The nearest candidate was not clearly nearer than the runner-up.
    Ambiguous {
        level: usize,
        ratio: f64,
        tie: bool,
        gap: f64,
    },
    /// The top-level value moved more than the jump tolerance.
    Jump { change: f64, limit: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Advance<T: Scalar> {
    Accepted(ChainState<T>),
    Rejected(Rejection),
}

/// Selection at one level that overrides continuity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Forced {
    /// Take the candidate at this index.
    Index(usize),
    /// Take the candidate farthest from the continuity hint.
    Farthest,
}

/// Ratio `d_nearest / d_second` above which a selection is refused.
pub const SEPARATION: f64 = 0.25;
/// Relative jump of the top value allowed per step.
pub const JUMP: f64 = 0.1;
/// Equidistance threshold, relative to the candidate gap.
pub const TIE: f64 = 1e-3;

/// A [`ChainDynamics`] with a minimum depth, e.g. the number of levels a
/// sheet needs before it reaches the base solution.
#[derive(Clone, Debug)]
pub struct Chain<D> {
    pub dynamics: D,
    pub min_depth: usize,
}

impl<D> Chain<D> {
    pub fn new(dynamics: D, min_depth: usize) -> Self {
        Chain {
            dynamics,
            min_depth,
        }
    }
}

impl<D> Chain<D> {
    pub fn points<T: Scalar>(&self, p: Cplx<T>) -> Result<Vec<Cplx<T>>>
    where
        D: ChainDynamics<T>,
    {
        let mut pts = vec![p];
        loop {
            let k = pts.len() - 1;
            if k >= self.min_depth && self.dynamics.trusted(pts[k]) {
                return Ok(pts);
            }
            if k + 1 >= MAX_LEVELS {
                return Err(Error::Invalid(format!(
                    "no trusted level within {MAX_LEVELS} steps of {:?}",
                    to_pair(p)
                )));
            }
            let next = self.dynamics.deeper(pts[k]);
            pts.push(next);
        }
    }

    /// Builds the state at `p` from explicit values for levels
    /// `0..values.len()`; the remaining levels are filled from `base` and
    /// continuity. Checks that the given levels are consistent.
    pub fn state_from<T: Scalar>(
        &self,
        p: Cplx<T>,
        top: &[Cplx<T>],
        tol: T,
    ) -> Result<ChainState<T>>
    where
        D: ChainDynamics<T>,
    {
        let points = self.points(p)?;
        let n = points.len() - 1;
        if top.len() > n + 1 {
            return Err(Error::Invalid(
                "more explicit levels than the chain depth".into(),
            ));
        }
        let mut values = vec![Complex::new(T::zero(), T::zero()); n + 1];
        values[n] = self.dynamics.base(points[n])?;
        for k in (0..n).rev() {
            let cands = self.dynamics.candidates(points[k], values[k + 1])?;
            values[k] = match top.get(k) {
                Some(&v) => {
                    let best = nearest(&cands, v);
                    if (cands[best] - v).norm() > tol * (T::one() + v.norm()) {
                        return Err(Error::Invalid(format!(
                            "level {k} value is not a preimage at {:?}",
                            to_pair(points[k])
                        )));
                    }
                    cands[best]
                }
                None if cands.len() == 1 => cands[0],
                None => return Err(Error::Invalid(format!("level {k} needs an explicit value"))),
            };
        }
        if let Some(&v) = top.get(n) {
            if (values[n] - v).norm() > tol * (T::one() + v.norm()) {
                return Err(Error::Invalid(
                    "deepest value disagrees with the base".into(),
                ));
            }
        }
        Ok(ChainState { points, values })
    }

    /// Extends `s` down to `depth` with base values at the deeper points.
    fn extended<T: Scalar>(&self, s: &ChainState<T>, depth: usize) -> Result<ChainState<T>>
    where
        D: ChainDynamics<T>,
    {
        let mut s = s.clone();
        while s.depth() < depth {
            let p = self
                .dynamics
                .deeper(*s.points.last().expect("nonempty chain"));
            s.points.push(p);
            s.values.push(self.dynamics.base(p)?);
        }
        Ok(s)
    }

    /// Re-solves every level at `to`, choosing at each level the candidate
    /// nearest to the value `from` had there.
    pub fn advance<T: Scalar>(&self, from: &ChainState<T>, to: Cplx<T>) -> Result<Advance<T>>
    where
        D: ChainDynamics<T>,
    {
        self.advance_with(from, to, None)
    }

    pub fn advance_with<T: Scalar>(
        &self,
        from: &ChainState<T>,
        to: Cplx<T>,
        forced: Option<(usize, Forced)>,
    ) -> Result<Advance<T>>
    where
        D: ChainDynamics<T>,
    {
        let points = self.points(to)?;
        let n = points.len() - 1;
        let old = self.extended(from, n)?;
        let mut values = vec![Complex::new(T::zero(), T::zero()); n + 1];
        values[n] = self.dynamics.base(points[n])?;
        for k in (0..n).rev() {
            let cands = self.dynamics.candidates(points[k], values[k + 1])?;
            let hint = old.values[k];
            if let Some((level, how)) = forced.filter(|f| f.0 == k) {
                values[k] = match how {
                    Forced::Index(i) => *cands.get(i).ok_or_else(|| {
                        Error::Invalid(format!("level {level} has {} candidates", cands.len()))
                    })?,
                    Forced::Farthest => {
                        let far = (0..cands.len())
                            .max_by(|&a, &b| {
                                (cands[a] - hint)
                                    .norm()
                                    .partial_cmp(&(cands[b] - hint).norm())
                                    .unwrap()
                            })
                            .expect("nonempty candidates");
                        cands[far]
                    }
                };
                continue;
            }
            match select(&cands, hint) {
                Selection::Clear(i) => values[k] = cands[i],
                Selection::Unclear { ratio, tie, gap } => {
                    return Ok(Advance::Rejected(Rejection::Ambiguous {
                        level: k,
                        ratio,
                        tie,
                        gap,
                    }))
                }
            }
            if !is_finite(values[k]) {
                return Err(Error::Pole {
                    at: to_pair(points[k]),
                });
            }
        }
        let change = (values[0] - from.values[0]).norm();
        let limit = T::of(JUMP) * from.values[0].norm().max(self.dynamics.value_floor());
        if change > limit && forced.is_none() {
            return Ok(Advance::Rejected(Rejection::Jump {
                change: change.f64(),
                limit: limit.f64(),
            }));
        }
        Ok(Advance::Accepted(ChainState { points, values }))
    }
}

/// Index of the candidate nearest to `hint`.
pub fn nearest<T: Scalar>(cands: &[Cplx<T>], hint: Cplx<T>) -> usize {
    (0..cands.len())
        .min_by(|&a, &b| {
            (cands[a] - hint)
                .norm()
                .partial_cmp(&(cands[b] - hint).norm())
                .unwrap()
        })
        .expect("nonempty candidates")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Selection {
    Clear(usize),
    Unclear { ratio: f64, tie: bool, gap: f64 },
}

/// Nearest-candidate selection with the separation and tie rules.
pub fn select<T: Scalar>(cands: &[Cplx<T>], hint: Cplx<T>) -> Selection {
    if cands.len() == 1 {
        return Selection::Clear(0);
    }
    let best = nearest(cands, hint);
    let d_best = (cands[best] - hint).norm();
    let (second, d_second) = (0..cands.len())
        .filter(|&i| i != best)
        .map(|i| (i, (cands[i] - hint).norm()))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("two candidates");
    let gap = (cands[best] - cands[second]).norm();
    let tie = (d_second - d_best) <= T::of(TIE) * gap;
    if d_second.is_zero() || d_best > T::of(SEPARATION) * d_second {
        return Selection::Unclear {
            ratio: (d_best / d_second).f64(),
            tie,
            gap: gap.f64(),
        };
    }
    Selection::Clear(best)
}
