use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::picard::operator::{iterate, sup_diff, StripOperator};
use crate::scalar::{Cplx, Scalar};

fn random_member<T: Scalar, O: StripOperator<T> + ?Sized>(
    op: &O,
    rng: &mut ChaCha8Rng,
) -> Vec<Cplx<T>> {
    (0..op.lattice().len())
        .map(|i| {
            let r: f64 = rng.gen::<f64>().sqrt();
            let t: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            op.center(i) + Complex::new(T::of(r * t.cos()), T::of(r * t.sin())) * op.radius(i)
        })
        .collect()
}

/// Largest `‖T[g] − T[h]‖ / ‖g − h‖` (sup norms over all lattice nodes)
/// over `pairs` random pairs drawn from the operator's ball.
pub fn contraction_probe<T: Scalar, O: StripOperator<T> + ?Sized>(
    op: &O,
    pairs: usize,
    seed: u64,
) -> Result<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::zero();
    for _ in 0..pairs {
        let g = random_member(op, &mut rng);
        let h = random_member(op, &mut rng);
        let den = sup_diff(&g, &h);
        if den > T::zero() {
            worst = worst.max(sup_diff(&op.apply(&g)?, &op.apply(&h)?) / den);
        }
    }
    Ok(worst)
}

/// Iterates from the ball center and from a random member of the ball;
/// returns the sup distance between the two limits.
pub fn uniqueness_probe<T: Scalar, O: StripOperator<T> + ?Sized>(
    op: &O,
    max_iter: usize,
    tol: T,
    seed: u64,
) -> Result<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = iterate(op, op.initial(), max_iter, tol, |_| Ok(()))?;
    let b = iterate(op, random_member(op, &mut rng), max_iter, tol, |_| Ok(()))?;
    Ok(sup_diff(&a.values, &b.values))
}

/// Outcome of [`escalate`].
#[derive(Clone, Debug)]
pub struct Escalated<S, T> {
    pub solution: S,
    pub rho: T,
    pub lipschitz: T,
    /// `ρ` values that were tried and rejected, with the reason.
    pub rejected: Vec<(T, String)>,
}

/// Runs `attempt(ρ)`, doubling `ρ` up to `cap` while the attempt fails
/// numerically or reports a Lipschitz estimate `≥ 1`. `attempt` returns the
/// solution with its probe value.
pub fn escalate<S, T: Scalar>(
    rho: T,
    cap: T,
    mut attempt: impl FnMut(T) -> Result<(S, T)>,
) -> Result<Escalated<S, T>> {
    let mut rho = rho;
    let mut rejected = Vec::new();
    loop {
        let outcome = attempt(rho);
        let reason = match outcome {
            Ok((solution, lip)) if lip < T::one() => {
                return Ok(Escalated {
                    solution,
                    rho,
                    lipschitz: lip,
                    rejected,
                });
            }
            Ok((_, lip)) => format!("probe {}", lip.f64()),
            Err(e) if e.is_numerical() => e.to_string(),
            Err(e) => return Err(e),
        };
        rejected.push((rho, reason.clone()));
        if rho * T::of(2.0) > cap {
            return Err(Error::Degenerate(format!(
                "no contracting strip up to ρ = {}; last: {reason}",
                rho.f64()
            )));
        }
        rho *= T::of(2.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::{EquationSpec, Side};
    use crate::picard::operator::{PicardOperator, SolveOptions};
    use crate::picard::strip::StripDomain;
    use crate::scalar::cx;

    fn op(src: &str, rho: f64) -> PicardOperator<f64> {
        let e = EquationSpec::from_config(src).unwrap();
        let d = StripDomain::lattice(rho, 1.0, Side::Left, 2, 5).unwrap();
        PicardOperator::new(&e, cx(1.0, 0.0), &d, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn constant_operator_has_zero_lipschitz() {
        assert_eq!(
            contraction_probe(&op("lambda=2", 10.0), 10, 1).unwrap(),
            0.0
        );
    }

    #[test]
    fn doubling_model_contracts_far_out() {
        let o = op("lambda=2\na2=1", 10.0);
        assert!(contraction_probe(&o, 20, 7).unwrap() < 1e-2);
        assert!(uniqueness_probe(&o, 200, 1e-13, 3).unwrap() < 1e-12);
    }

    #[test]
    fn probe_is_reproducible() {
        let o = op("lambda=2\na2=1", 2.0);
        assert_eq!(
            contraction_probe(&o, 5, 9).unwrap(),
            contraction_probe(&o, 5, 9).unwrap()
        );
    }

    #[test]
    fn escalation_doubles_until_contracting() {
        let e = escalate(1.0, 64.0, |rho: f64| Ok(((), 8.0 / rho))).unwrap();
        assert_eq!(e.rho, 16.0);
        assert_eq!(e.rejected.len(), 4);
        assert!(escalate(1.0, 4.0, |rho: f64| Ok(((), 8.0 / rho))).is_err());
    }
}
