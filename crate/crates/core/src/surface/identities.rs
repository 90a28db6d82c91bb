use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::continuation::{origin_loop, sheet_element};
use crate::error::{Error, Result};
use crate::scalar::{Cplx, Scalar};
use crate::surface::graph::SurfaceGraph;
use crate::surface::series::ModelSolution;

/// Largest residual of one identity over the samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityResidual {
    pub name: String,
    pub max_residual: f64,
    pub samples: usize,
    /// `false` for the control that is expected to fail.
    pub expected_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityReport {
    pub seed: u64,
    pub residuals: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn get(&self, name: &str) -> Option<&IdentityResidual> {
        self.residuals.iter().find(|r| r.name == name)
    }
}

/// Names of the identities, in report order.
pub const IDENTITIES: [&str; 7] = [
    "h0_plus_h1",
    "h0_functional",
    "h1_functional",
    "h10_plus_h11",
    "h10_h1_circle",
    "h10_functional",
    "h1_in_original",
];

struct Values<T: Scalar> {
    h0: Cplx<T>,
    h0l: Cplx<T>,
    h1: Cplx<T>,
    h1l: Cplx<T>,
    h10: Cplx<T>,
    h10l: Cplx<T>,
    h11: Cplx<T>,
}

fn sample_values<T: Scalar>(
    ms: &ModelSolution<T>,
    g: &SurfaceGraph<T>,
    w: Cplx<T>,
) -> Result<Values<T>> {
    let at = |label: &str, p: Cplx<T>| -> Result<Cplx<T>> {
        Ok(sheet_element(ms, g.germ(label)?, p)?.value())
    };
    let lw = w * ms.lambda;
    Ok(Values {
        h0: at("0", w)?,
        h0l: at("0", lw)?,
        h1: at("1", w)?,
        h1l: at("1", lw)?,
        h10: at("10", w)?,
        h10l: at("10", lw)?,
        h11: at("11", w)?,
    })
}

fn residuals<T: Scalar>(lam: Cplx<T>, v: &Values<T>) -> [T; 7] {
    let half = lam / T::of(2.0);
    let circle = lam * lam / T::of(2.0) - lam;
    [
        (v.h0 + v.h1 + lam).norm(),
        (v.h0l - v.h0 * v.h0 - lam * v.h0).norm(),
        (v.h1l + v.h1 * v.h1 + lam * v.h1 + lam).norm(),
        (v.h10 + v.h11 + lam).norm(),
        ((v.h10 + half).powi(2) + (v.h1 + half).powi(2) - circle).norm(),
        ((v.h10l + half).powi(2) + (v.h10 * v.h10 + lam * v.h10 + half).powi(2) - circle).norm(),
        (v.h1l - lam * v.h1 - v.h1 * v.h1).norm(),
    ]
}

/// Evaluates the sheet identities at `samples` random points `w = re^{iθ}`
/// with `θ` kept away from the branch ray and `r` up to 1.2 times the outermost
/// ladder point. A sample whose evaluation fails is redrawn up to 3 times.
pub fn sheet_identity_check<T: Scalar>(
    ms: &ModelSolution<T>,
    graph: &SurfaceGraph<T>,
    samples: usize,
    seed: u64,
) -> Result<IdentityReport> {
    if graph.depth < 2 {
        return Err(Error::Invalid("identity checks need depth ≥ 2".into()));
    }
    let w0 = ms.branch_point()?;
    let ray = w0 / w0.norm();
    let r_max = graph.ladder.last().expect("nonempty ladder").norm() * T::of(1.2);
    let r_min = graph.r_hat * T::of(0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [T::zero(); 7];
    for _ in 0..samples {
        let mut tries = 0;
        loop {
            let r = r_min + (r_max - r_min) * T::of(rng.gen::<f64>());
            let th = T::of(0.15 + (std::f64::consts::TAU - 0.3) * rng.gen::<f64>());
            let w = ray * Complex::from_polar(r, th);
            match sample_values(ms, graph, w) {
                Ok(v) => {
                    for (a, b) in worst.iter_mut().zip(residuals(ms.lambda, &v)) {
                        *a = a.max(b);
                    }
                    break;
                }
                Err(e) if tries < 3 && e.is_numerical() => tries += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(IdentityReport {
        seed,
        residuals: IDENTITIES
            .iter()
            .zip(worst)
            .map(|(name, r)| IdentityResidual {
                name: name.to_string(),
                max_residual: r.f64(),
                samples,
                expected_zero: *name != "h1_in_original",
            })
            .collect(),
    })
}

/// Whether 0 can be a branch point on any sheet: the `e`-tree
/// (`e₀ = λ²/4 − λ`, `e_n = −λ/2 ± √(λ²/4 + e_{n−1})`) must stay away from
/// `−λ²/4`, and the `d`-tree (`d₀ = λ²/4 − λ/2`, read as
/// `d_n = −λ/2 ± √d_{n−1}`) away from 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Claim4Report {
    pub lambda: f64,
    pub depth: usize,
    pub e0: f64,
    pub min_e_gap: f64,
    pub d0: f64,
    pub d1: [[f64; 2]; 2],
    pub min_d: f64,
    pub e_nodes: usize,
    pub d_nodes: usize,
    pub d_reading: String,
    pub pass: bool,
}

fn tree_min<T: Scalar>(
    root: Cplx<T>,
    depth: usize,
    step: impl Fn(Cplx<T>) -> [Cplx<T>; 2],
    measure: impl Fn(Cplx<T>) -> T,
) -> (T, usize) {
    let mut level = vec![root];
    let mut best = measure(root);
    let mut count = 1;
    for _ in 0..depth {
        let next: Vec<Cplx<T>> = level.iter().flat_map(|&e| step(e)).collect();
        for &e in &next {
            best = best.min(measure(e));
        }
        count += next.len();
        level = next;
    }
    (best, count)
}

pub fn claim4_sequences<T: Scalar>(lambda: T, depth: usize, tol: T) -> Result<Claim4Report> {
    if lambda <= T::zero() || lambda >= T::one() {
        return Err(Error::Invalid("need λ in (0, 1)".into()));
    }
    let lam = Complex::new(lambda, T::zero());
    let half = lam / T::of(2.0);
    let quarter = lam * lam / T::of(4.0);
    let e0 = quarter - lam;
    let (min_e, e_nodes) = tree_min(
        e0,
        depth,
        |e| {
            let s = (quarter + e).sqrt();
            [-half + s, -half - s]
        },
        |e| (e + quarter).norm(),
    );
    let d0 = quarter - half;
    let d_step = |d: Cplx<T>| {
        let s = d.sqrt();
        [-half + s, -half - s]
    };
    let (min_d, d_nodes) = tree_min(d0, depth, d_step, |d| d.norm());
    let d1 = d_step(d0).map(|d| [d.re.f64(), d.im.f64()]);
    Ok(Claim4Report {
        lambda: lambda.f64(),
        depth,
        e0: e0.re.f64(),
        min_e_gap: min_e.f64(),
        d0: d0.re.f64(),
        d1,
        min_d: min_d.f64(),
        e_nodes,
        d_nodes,
        d_reading: "d_n = -lambda/2 ± sqrt(d_{n-1})".into(),
        pass: min_e >= tol && min_d >= tol,
    })
}

/// One small loop around 0 on each sheet; returns the labels that came back
/// swapped (expected: none).
pub fn origin_loops<T: Scalar>(
    ms: &ModelSolution<T>,
    graph: &SurfaceGraph<T>,
    radius: T,
    tol: T,
) -> Result<Vec<String>> {
    let mut swapped = Vec::new();
    for s in &graph.sheets {
        if origin_loop(ms, &s.germ, radius, tol)?.swapped {
            swapped.push(s.label.clone());
        }
    }
    Ok(swapped)
}
