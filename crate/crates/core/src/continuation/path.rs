use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::continuation::chain::{Advance, Chain, ChainDynamics, ChainState, Rejection};
use crate::error::{Error, Result};
use crate::io::{Metadata, PlaneTag, FORMAT_VERSION};
use crate::scalar::{to_pair, Cplx, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathKind<T: Scalar> {
    Segment {
        a: Cplx<T>,
        b: Cplx<T>,
    },
    /// Counter-clockwise for positive `turns`.
    Circle {
        center: Cplx<T>,
        radius: T,
        start_angle: T,
        turns: T,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSpec<T: Scalar> {
    pub kind: PathKind<T>,
    pub max_step: T,
    pub min_step: T,
}

impl<T: Scalar> PathSpec<T> {
    /// Segment with `max_step = length/16` and `min_step = 10⁻⁶·length`.
    pub fn segment(a: Cplx<T>, b: Cplx<T>) -> Self {
        let len = (b - a).norm();
        PathSpec {
            kind: PathKind::Segment { a, b },
            max_step: len / T::of(16.0),
            min_step: len * T::of(1e-6),
        }
    }

    /// Circle with `max_step = radius/5` and `min_step = 10⁻⁶·length`.
    pub fn circle(center: Cplx<T>, radius: T, start_angle: T, turns: T) -> Self {
        let kind = PathKind::Circle {
            center,
            radius,
            start_angle,
            turns,
        };
        let len = T::TAU() * radius * turns.abs();
        PathSpec {
            kind,
            max_step: radius / T::of(5.0),
            min_step: len * T::of(1e-6),
        }
    }

    pub fn length(&self) -> T {
        match self.kind {
            PathKind::Segment { a, b } => (b - a).norm(),
            PathKind::Circle { radius, turns, .. } => T::TAU() * radius * turns.abs(),
        }
    }

    /// Point at parameter `t ∈ [0, 1]`.
    pub fn at(&self, t: T) -> Cplx<T> {
        match self.kind {
            PathKind::Segment { a, b } => a + (b - a) * t,
            PathKind::Circle {
                center,
                radius,
                start_angle,
                turns,
            } => {
                let th = start_angle + T::TAU() * turns * t;
                center + Complex::from_polar(radius, th)
            }
        }
    }

    pub fn reversed(&self) -> Self {
        let kind = match self.kind {
            PathKind::Segment { a, b } => PathKind::Segment { a: b, b: a },
            PathKind::Circle {
                center,
                radius,
                start_angle,
                turns,
            } => PathKind::Circle {
                center,
                radius,
                start_angle: start_angle + T::TAU() * turns,
                turns: -turns,
            },
        };
        PathSpec { kind, ..*self }
    }

    /// Smallest distance from the path to `p`.
    pub fn distance_to(&self, p: Cplx<T>) -> T {
        match self.kind {
            PathKind::Segment { a, b } => {
                let d = b - a;
                let len2 = d.norm_sqr();
                if len2.is_zero() {
                    return (p - a).norm();
                }
                let t = ((p - a) * d.conj()).re / len2;
                (p - self.at(t.max(T::zero()).min(T::one()))).norm()
            }
            PathKind::Circle { center, radius, .. } => ((p - center).norm() - radius).abs(),
        }
    }

    /// Fails when the path passes within `min_step` of a known branch point.
    pub fn check_clearance(&self, branch_points: &[Cplx<T>]) -> Result<()> {
        for &b in branch_points {
            if self.distance_to(b) < self.min_step {
                return Err(Error::BranchPoint {
                    at: to_pair(b),
                    level: 0,
                });
            }
        }
        Ok(())
    }
}

/// A germ of a continued solution: the chain state at its point plus the
/// `(point, value)` pairs visited on the way there.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionElement<T: Scalar> {
    pub plane: PlaneTag,
    pub state: ChainState<T>,
    pub history: Vec<(Cplx<T>, Cplx<T>)>,
}

impl<T: Scalar> FunctionElement<T> {
    pub fn new(plane: PlaneTag, state: ChainState<T>) -> Self {
        let history = vec![(state.point(), state.value())];
        FunctionElement {
            plane,
            state,
            history,
        }
    }

    pub fn point(&self) -> Cplx<T> {
        self.state.point()
    }

    pub fn value(&self) -> Cplx<T> {
        self.state.value()
    }

    /// Largest deviation of the recorded levels from the chain relation.
    pub fn consistency<D: ChainDynamics<T>>(&self, chain: &Chain<D>) -> Result<T> {
        let s = &self.state;
        let n = s.depth();
        let mut worst = (chain.dynamics.base(s.points[n])? - s.values[n]).norm();
        for k in 0..n {
            let c = chain.dynamics.candidates(s.points[k], s.values[k + 1])?;
            let d = c
                .iter()
                .map(|v| (*v - s.values[k]).norm())
                .fold(T::infinity(), T::min);
            worst = worst.max(d);
        }
        Ok(worst)
    }

    pub fn to_path_json(&self, metadata: Metadata) -> PathJson {
        PathJson {
            format_version: FORMAT_VERSION,
            plane: self.plane,
            path: self
                .history
                .iter()
                .map(|(p, v)| PathPoint {
                    point: pair(*p),
                    value: pair(*v),
                })
                .collect(),
            metadata,
        }
    }
}

fn pair<T: Scalar>(z: Cplx<T>) -> [f64; 2] {
    let (a, b) = to_pair(z);
    [a + 0.0, b + 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathPoint {
    pub point: [f64; 2],
    pub value: [f64; 2],
}

/// Ordered `(point, value)` pairs of a continuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathJson {
    pub format_version: u32,
    pub plane: PlaneTag,
    pub path: Vec<PathPoint>,
    pub metadata: Metadata,
}

fn collapse_error<T: Scalar>(at: Cplx<T>, why: Rejection) -> Error {
    let at = to_pair(at);
    match why {
        Rejection::Ambiguous { level, gap, .. } if gap <= 1e-12 => Error::BranchPoint { at, level },
        Rejection::Ambiguous {
            level, tie: true, ..
        } => Error::Tie { at, level },
        _ => Error::StepCollapse { at },
    }
}

/// Walks `path` from `start`, re-solving the chain at each step and halving
/// the step on ambiguous selections or large jumps.
pub fn continue_along<T: Scalar, D: ChainDynamics<T>>(
    path: &PathSpec<T>,
    start: &FunctionElement<T>,
    chain: &Chain<D>,
) -> Result<FunctionElement<T>> {
    if start.plane != chain.dynamics.plane() {
        return Err(Error::Invalid(
            "function element and chain live in different planes".into(),
        ));
    }
    let len = path.length();
    if len.is_zero() {
        return Ok(start.clone());
    }
    let origin = path.at(T::zero());
    if (origin - start.point()).norm()
        > path
            .min_step
            .max(T::epsilon() * T::of(16.0) * (T::one() + origin.norm()))
    {
        return Err(Error::Invalid(
            "path does not start at the function element".into(),
        ));
    }
    let max_dt = (path.max_step / len).min(T::one());
    let min_dt = path.min_step / len;
    let mut out = start.clone();
    let mut t = T::zero();
    let mut dt = max_dt;
    while t < T::one() {
        let t1 = (t + dt).min(T::one());
        let q = path.at(t1);
        match chain.advance(&out.state, q)? {
            Advance::Accepted(s) => {
                out.history.push((s.point(), s.value()));
                out.state = s;
                t = t1;
                dt = (dt * T::of(1.5)).min(max_dt);
            }
            Advance::Rejected(why) => {
                dt /= T::of(2.0);
                if dt < min_dt {
                    return Err(collapse_error(q, why));
                }
            }
        }
    }
    Ok(out)
}

/// Result of continuing around a closed loop.
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyResult<T: Scalar> {
    pub start_value: Cplx<T>,
    pub end_value: Cplx<T>,
    pub loops: u32,
    pub swapped: bool,
    pub end: FunctionElement<T>,
}

/// Continues `start` around the circle through it centred at `center`,
/// `loops` times counter-clockwise.
pub fn loop_around<T: Scalar, D: ChainDynamics<T>>(
    chain: &Chain<D>,
    start: &FunctionElement<T>,
    center: Cplx<T>,
    loops: u32,
    tol: T,
) -> Result<MonodromyResult<T>> {
    let d = start.point() - center;
    let path = PathSpec::circle(center, d.norm(), d.arg(), T::int(loops as i64));
    let end = continue_along(&path, start, chain)?;
    let (a, b) = (start.value(), end.value());
    Ok(MonodromyResult {
        start_value: a,
        end_value: b,
        loops,
        swapped: (b - a).norm() > tol,
        end,
    })
}
