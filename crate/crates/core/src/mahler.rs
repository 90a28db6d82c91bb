//! The substitution `y(z) = Y(u) − λ/2`, `u = exp(−2^z)`, which turns the
//! model equation into `Y(u²) = Y(u)² + c` with `c = λ/2 − λ²/4`.

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuation::{Advance, Chain, ChainDynamics, ChainState, Forced, Rejection};
use crate::error::{Error, Result};
use crate::io::PlaneTag;
use crate::numerics::PowerSeries;
use crate::scalar::{cx, to_pair, Cplx, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MahlerCase {
    /// `c ∈ (0, ¼]`.
    Case1,
    /// `c > ¼`.
    Case2,
    Other,
}

/// Case of a constant `c`; anything non-real or `≤ 0` is `Other`.
pub fn classify_c<T: Scalar>(c: Cplx<T>) -> MahlerCase {
    if !c.im.is_zero() || c.re <= T::zero() {
        MahlerCase::Other
    } else if c.re <= T::of(0.25) {
        MahlerCase::Case1
    } else {
        MahlerCase::Case2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MahlerParams<T: Scalar> {
    pub lambda: Cplx<T>,
    pub c: Cplx<T>,
    pub case: MahlerCase,
    /// Largest `|(y + λ/2)² + c − (y² + λy + λ/2)|` over the random check points.
    pub identity_residual: T,
}

/// `c = λ/2 − λ²/4`, checked against the substitution identity at 20
/// random points. A non-real `λ` is classified `Other`.
pub fn to_mahler<T: Scalar>(lambda: Cplx<T>, seed: u64) -> MahlerParams<T> {
    let c = lambda / T::of(2.0) - lambda * lambda / T::of(4.0);
    let case = if lambda.im.is_zero() {
        classify_c(c)
    } else {
        MahlerCase::Other
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = lambda / T::of(2.0);
    let mut worst = T::zero();
    for _ in 0..20 {
        let y: Cplx<T> = cx(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let lhs = (y + half) * (y + half) + c;
        let rhs = y * y + lambda * y + half;
        worst = worst.max((lhs - rhs).norm());
    }
    MahlerParams {
        lambda,
        c,
        case,
        identity_residual: worst,
    }
}

/// `Y(u) = u⁻¹ + Σ_{n≥0} y_n uⁿ` solving `Y(u²) = Y(u)² + c`, through `y_N`.
/// Matching `u^k` gives `2y_{k+1} = [u^k]Y(u²) − Σ_{a+b=k, a,b≥0} y_a y_b − c·[k=0]`.
pub fn mahler_laurent<T: Scalar>(c: Cplx<T>, n: usize) -> Result<PowerSeries<T>> {
    if n == 0 {
        return Err(Error::Invalid("need N ≥ 1".into()));
    }
    // a[i] = y_{i−1}
    let mut a: Vec<Cplx<T>> = vec![Complex::zero(); n + 2];
    a[0] = Complex::new(T::one(), T::zero());
    let y = |a: &[Cplx<T>], i: usize| a[i + 1];
    for k in 0..n {
        let from_square = if k % 2 == 0 {
            y(&a, k / 2)
        } else {
            Complex::zero()
        };
        let mut conv: Cplx<T> = Complex::zero();
        for i in 0..=k {
            conv += y(&a, i) * y(&a, k - i);
        }
        let mut next = from_square - conv;
        if k == 0 {
            next -= c;
        }
        a[k + 2] = next / T::of(2.0);
    }
    Ok(PowerSeries::new(Complex::zero(), -1, a))
}

/// `max |Y(u²) − Y(u)² − c|` over `samples` points of `|u| = radius`, which
/// bounds the residual on the whole punctured disk.
pub fn laurent_residual<T: Scalar>(y: &PowerSeries<T>, c: Cplx<T>, radius: T, samples: usize) -> T {
    (0..samples).fold(T::zero(), |acc, k| {
        let u = Complex::from_polar(radius, T::TAU() * T::int(k as i64) / T::int(samples as i64));
        let v = y.eval_unchecked(u);
        acc.max((y.eval_unchecked(u * u) - v * v - c).norm())
    })
}

/// A horizontal strip `lower < Im z < upper` of the `z`-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Strips `log₂((4n−1)π/2) < Im z < log₂((4n+1)π/2)` for `n = 1..=n_max`.
pub fn strips(n_max: usize) -> Result<Vec<Strip>> {
    if n_max == 0 {
        return Err(Error::Invalid("need nMax ≥ 1".into()));
    }
    let b = |k: f64| (k * std::f64::consts::FRAC_PI_2).log2();
    Ok((1..=n_max)
        .map(|n| Strip {
            n,
            lower: b(4.0 * n as f64 - 1.0),
            upper: b(4.0 * n as f64 + 1.0),
        })
        .collect())
}

/// The lines `Im z = log₂((2m+1)π/2)`, `m = 1..=m_max`, bounding the strips.
pub fn strip_boundaries(m_max: usize) -> Vec<f64> {
    (1..=m_max)
        .map(|m| ((2 * m + 1) as f64 * std::f64::consts::FRAC_PI_2).log2())
        .collect()
}

/// `Y(u²) = Y(u)² + c` read in the `u`-plane: `deeper(u) = u²`, the base is
/// the Laurent series for `|u| ≤ trust`, candidates are `±√(Y(u²) − c)`.
#[derive(Clone, Debug)]
pub struct MahlerDynamics<'a, T: Scalar> {
    pub c: Cplx<T>,
    pub series: &'a PowerSeries<T>,
    pub trust: T,
}

impl<T: Scalar> ChainDynamics<T> for MahlerDynamics<'_, T> {
    fn plane(&self) -> PlaneTag {
        PlaneTag::UPlane
    }

    fn deeper(&self, p: Cplx<T>) -> Cplx<T> {
        p * p
    }

    fn trusted(&self, p: Cplx<T>) -> bool {
        p.norm() <= self.trust
    }

    fn base(&self, p: Cplx<T>) -> Result<Cplx<T>> {
        self.series.eval(p)
    }

    fn candidates(&self, _p: Cplx<T>, v: Cplx<T>) -> Result<Vec<Cplx<T>>> {
        let s = (v - self.c).sqrt();
        Ok(vec![s, -s])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeSample {
    pub angle: f64,
    pub track: usize,
    pub r: f64,
    pub abs_y: f64,
    /// `d|Y|/dr` by a backward difference along the track.
    pub d_abs_y: f64,
}

/// A point where continuation along the ray could not choose a preimage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AmbiguityEvent {
    pub angle: f64,
    pub track: usize,
    pub r: f64,
    pub level: usize,
    /// `false` once the track cap stopped further forking.
    pub forked: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeReport {
    pub c: [f64; 2],
    pub case: MahlerCase,
    pub samples: Vec<ProbeSample>,
    pub events: Vec<AmbiguityEvent>,
}

impl ProbeReport {
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.abs_y).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ProbeOptions {
    pub order: usize,
    pub trust: f64,
    /// Radius where every ray starts.
    pub start: f64,
    pub max_tracks: usize,
    /// Smallest radial step before a selection counts as ambiguous.
    pub min_step: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            order: 200,
            trust: 0.7,
            start: 0.5,
            max_tracks: 8,
            min_step: 1e-9,
        }
    }
}

struct Track<T: Scalar> {
    id: usize,
    state: ChainState<T>,
    last: Option<(f64, f64)>,
}

/// Pushes `Y` outward along rays by the chain `u → u² → …` from the trusted
/// disk, recording `|Y|` at each radius. Where a preimage choice becomes
/// ambiguous the event is recorded and both branches are followed.
pub fn boundary_probe<T: Scalar>(
    c: Cplx<T>,
    angles: &[f64],
    radii: &[f64],
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    let case = classify_c(c);
    if case == MahlerCase::Other {
        return Err(Error::Invalid("boundary probes need real c > 0".into()));
    }
    if radii.iter().any(|&r| !(0.0..1.0).contains(&r)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(
            "radii must increase strictly inside (0, 1)".into(),
        ));
    }
    let series = mahler_laurent(c, opts.order)?;
    let chain = Chain::new(
        MahlerDynamics {
            c,
            series: &series,
            trust: T::of(opts.trust),
        },
        0,
    );
    let per_ray: Vec<Result<(Vec<ProbeSample>, Vec<AmbiguityEvent>)>> = angles
        .par_iter()
        .map(|&th| probe_ray(&chain, th, radii, opts))
        .collect();
    let mut samples = Vec::new();
    let mut events = Vec::new();
    for r in per_ray {
        let (s, e) = r?;
        samples.extend(s);
        events.extend(e);
    }
    Ok(ProbeReport {
        c: [c.re.f64(), c.im.f64()],
        case,
        samples,
        events,
    })
}

fn probe_ray<T: Scalar>(
    chain: &Chain<MahlerDynamics<'_, T>>,
    angle: f64,
    radii: &[f64],
    opts: &ProbeOptions,
) -> Result<(Vec<ProbeSample>, Vec<AmbiguityEvent>)> {
    let at = |r: f64| Complex::from_polar(T::of(r), T::of(angle));
    let r0 = opts.start.min(radii.first().copied().unwrap_or(opts.start));
    let mut tracks = vec![Track {
        id: 0,
        state: chain.state_from(at(r0), &[], T::of(1e-9))?,
        last: None,
    }];
    let mut next_id = 1;
    let mut samples = Vec::new();
    let mut events = Vec::new();
    for &target in radii {
        let mut spawned = Vec::new();
        for tr in tracks.iter_mut() {
            let mut r = tr.state.point().norm().f64();
            let mut dr = (target - r).max(0.0);
            while r < target {
                let r1 = (r + dr).min(target);
                match chain.advance(&tr.state, at(r1))? {
                    Advance::Accepted(s) => {
                        tr.state = s;
                        r = r1;
                        dr = (dr * 1.5).min(target - r).max(opts.min_step);
                    }
                    Advance::Rejected(_) if dr > opts.min_step => dr /= 2.0,
                    Advance::Rejected(why) => {
                        let level = match why {
                            Rejection::Ambiguous { level, .. } => level,
                            Rejection::Jump { .. } => {
                                return Err(Error::StepCollapse {
                                    at: to_pair(at(r1)),
                                })
                            }
                        };
                        // Step across the ambiguous point taking each preimage.
                        let across = r1 + 16.0 * opts.min_step;
                        let forked = next_id < opts.max_tracks;
                        events.push(AmbiguityEvent {
                            angle,
                            track: tr.id,
                            r: r1,
                            level,
                            forked,
                        });
                        let a = chain.advance_with(
                            &tr.state,
                            at(across),
                            Some((level, Forced::Index(0))),
                        )?;
                        let b = chain.advance_with(
                            &tr.state,
                            at(across),
                            Some((level, Forced::Index(1))),
                        )?;
                        let (Advance::Accepted(a), Advance::Accepted(b)) = (a, b) else {
                            return Err(Error::StepCollapse {
                                at: to_pair(at(across)),
                            });
                        };
                        if forked {
                            spawned.push(Track {
                                id: next_id,
                                state: b,
                                last: tr.last,
                            });
                            next_id += 1;
                        }
                        tr.state = a;
                        r = across;
                        dr = opts.min_step * 64.0;
                    }
                }
            }
        }
        tracks.extend(spawned);
        for tr in tracks.iter_mut() {
            let r = tr.state.point().norm().f64();
            let v = tr.state.value().norm().f64();
            let d = tr.last.map_or(f64::NAN, |(r0, v0)| {
                if r > r0 {
                    (v - v0) / (r - r0)
                } else {
                    f64::NAN
                }
            });
            samples.push(ProbeSample {
                angle,
                track: tr.id,
                r,
                abs_y: v,
                d_abs_y: d,
            });
            tr.last = Some((r, v));
        }
    }
    Ok((samples, events))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(x: f64) -> Cplx<f64> {
        cx(x, 0.0)
    }

    #[test]
    fn classification() {
        let p = to_mahler(c64(0.5), 42);
        assert_eq!(p.c, c64(3.0 / 16.0));
        assert_eq!(p.case, MahlerCase::Case1);
        assert!(p.identity_residual < 1e-14);
        assert_eq!(to_mahler(c64(1.0), 1).c, c64(0.25));
        assert_eq!(classify_c(c64(0.25)), MahlerCase::Case1);
        assert_eq!(classify_c(c64(0.25 + 1e-12)), MahlerCase::Case2);
        assert_eq!(classify_c(c64(-0.1)), MahlerCase::Other);
        assert_eq!(to_mahler(cx::<f64>(0.5, 0.1), 1).case, MahlerCase::Other);
    }

    #[test]
    fn laurent_coefficients() {
        let c = c64(3.0 / 16.0);
        let y = mahler_laurent(c, 200).unwrap();
        let a = y.scaled_coeffs();
        assert_eq!(a[0], c64(1.0));
        assert_eq!(a[1], c64(0.0));
        assert_eq!(a[2], c64(-3.0 / 32.0));
        // Y is odd.
        assert!(a.iter().skip(1).step_by(2).all(|v| *v == c64(0.0)));
        assert!(laurent_residual(&y, c, 0.7, 256) <= 1e-10);
        for r in [1e-3, 1e-5] {
            let u = cx(r, 0.0);
            assert!((u * y.eval(u).unwrap() - 1.0).norm() < 2.0 * r * r);
        }
    }

    #[test]
    fn q_difference_form() {
        // G(w) = Y(e^{−1/w}) − λ/2 satisfies G(λw) = λG(w) + G(w)² at λ = ½.
        let lam = 0.5;
        let c = to_mahler(c64(lam), 0).c;
        let y = mahler_laurent(c, 200).unwrap();
        let g = |w: Cplx<f64>| y.eval((-w.inv()).exp()).unwrap() - lam / 2.0;
        for w in [cx(2.0, 0.0), cx(3.0, 1.0), cx(1.5, -0.4)] {
            let gw = g(w);
            assert!((g(w * lam) - lam * gw - gw * gw).norm() < 1e-12, "{w}");
        }
    }

    #[test]
    fn transform_to_the_original_variable() {
        // y(z) = Y(exp(−2^z)) − λ/2 solves y(z+1) = y(z)² + λy(z).
        let lam = 0.5;
        let y = mahler_laurent(to_mahler(c64(lam), 0).c, 200).unwrap();
        let f = |z: Cplx<f64>| y.eval((-(cx(2.0f64, 0.0).powc(z))).exp()).unwrap() - lam / 2.0;
        for z in [cx(3.2, 0.0), cx(3.5, 0.3), cx(4.0, -0.2)] {
            let v = f(z);
            let rel = (f(z + 1.0) - v * v - lam * v).norm() / (1.0 + v.norm_sqr());
            assert!(rel < 1e-12, "{z}");
        }
    }

    #[test]
    fn strips_are_ordered() {
        let s = strips(3).unwrap();
        assert!(s.iter().all(|s| s.lower < s.upper));
        assert!(s.windows(2).all(|w| w[0].upper < w[1].lower));
        let b = strip_boundaries(6);
        assert!((b[0] - s[0].lower).abs() < 1e-15 && (b[1] - s[0].upper).abs() < 1e-15);
        assert!(strips(0).is_err());
    }

    #[test]
    fn probe_case1_stays_bounded() {
        let radii: Vec<f64> = [0.6, 0.8, 0.9, 0.95, 0.99, 0.999].to_vec();
        let rep = boundary_probe(
            c64(3.0 / 16.0),
            &[0.0, 0.4, 1.3, 2.9],
            &radii,
            &ProbeOptions::default(),
        )
        .unwrap();
        assert!(rep.max_abs() < 1e3, "{}", rep.max_abs());
        assert_eq!(rep.samples.len(), 4 * radii.len());
    }

    #[test]
    fn probe_case2_meets_ambiguity() {
        // With c > ¼ the real ray meets a square-root branch point near r = 0.9998.
        let radii: Vec<f64> = [0.6, 0.9, 0.99, 0.999, 0.9999, 0.99999].to_vec();
        let rep = boundary_probe(c64(0.3), &[0.0], &radii, &ProbeOptions::default()).unwrap();
        assert!(!rep.events.is_empty());
        let tracks = rep.samples.iter().map(|s| s.track).max().unwrap() + 1;
        assert!(tracks >= 2, "{:?}", rep.events);
        let last: Vec<&ProbeSample> = rep.samples.iter().filter(|s| s.r > 0.99998).collect();
        // The forked tracks are complex conjugates with equal modulus.
        assert!((last[0].abs_y - last[1].abs_y).abs() < 1e-9, "{last:?}");
    }
}
