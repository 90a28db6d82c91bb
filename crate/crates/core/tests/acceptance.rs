//! End-to-end checks with their tolerances and time budgets. Each check
//! prints one PASS/FAIL line; the test fails if any check fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use diffeq_core::continuation::{evaluate_sheet, monodromy, sheet_element};
use diffeq_core::equation::{abel_normalize, lambda_pow, EquationSpec, RationalMap, Side};
use diffeq_core::io::Metadata;
use diffeq_core::mahler::{
    boundary_probe, laurent_residual, mahler_laurent, strips, to_mahler, MahlerCase, ProbeOptions,
};
use diffeq_core::picard::{
    abel_solve, contraction_probe, forward_telescope, picard_solve, uniqueness_probe,
    AbelNormalForm, AbelOperator, AbelOptions, PicardOperator, SolveOptions, StripDomain,
};
use diffeq_core::surface::{
    build_surface, claim4_sequences, estimate_radius, find_rhat, model_series, origin_loops,
    sheet_identity_check, Edge, ModelSolution, SurfaceOptions,
};
use diffeq_core::{cx, Cdd, DoubleDouble, Scalar, C64};
use num_traits::Float;

type Outcome = Result<String, String>;

fn c64(re: f64, im: f64) -> C64 {
    cx(re, im)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn half() -> ModelSolution<f64> {
    let ms = model_series(c64(0.5, 0.0), c64(-1.0, 0.0), 300).unwrap();
    let r = find_rhat(&ms, 1e-13).unwrap();
    ms.with_rhat(r)
}

/// `(e^{α2^z} − 1)·2^{−z}`, summing `expm1` as a series.
fn doubling_exact(z: C64, alpha: C64) -> C64 {
    let t = cx::<f64>(2.0, 0.0).powc(z);
    let u = alpha * t;
    let (mut term, mut sum) = (u, u);
    for n in 2..40 {
        term *= u / n as f64;
        sum += term;
    }
    sum / t
}

fn doubling_setup() -> (EquationSpec<f64>, StripDomain<f64>) {
    let e = EquationSpec::from_config("lambda=2\na2=1").unwrap();
    let d = StripDomain::lattice(10.0, 1.0, Side::Left, 2, 10).unwrap();
    (e, d)
}

fn closed_form() -> Outcome {
    let (e, d) = doubling_setup();
    let alpha = c64(1.0, 0.0);
    let f = picard_solve(&e, alpha, &d, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let n = d.grid().len();
    let mut good = 0;
    let mut tele_worst = 0.0f64;
    for (z, w) in d.grid().iter().zip(&f.values) {
        if (w - doubling_exact(*z, alpha)).norm() <= 1e-8 {
            good += 1;
        }
        let t = forward_telescope(&e, alpha, *z, 60, 8).map_err(|e| e.to_string())?;
        tele_worst = tele_worst.max((t - w).norm());
    }
    let frac = good as f64 / n as f64;
    check(
        frac >= 0.95 && tele_worst <= 1e-8,
        format!("{good}/{n} points within 1e-8 of the closed form, telescope gap {tele_worst:.1e}"),
    )
}

fn parabolic() -> Outcome {
    let exact = RationalMap::parse("y/(1+y)").unwrap();
    let n = abel_normalize(&exact, c64(0.0, 0.0), 20, 1e-12).map_err(|e| e.to_string())?;
    let cmax = n.c.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let alpha = 0.7;
    let nf =
        AbelNormalForm::from_normalization(&n, c64(alpha, 0.0), 0.5).map_err(|e| e.to_string())?;
    let d = StripDomain::lattice(5.0, 1.0, Side::Left, 2, 3).unwrap();
    let s = abel_solve(
        &nf,
        &d,
        &AbelOptions {
            padding: 50,
            ..AbelOptions::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let wmax = s.w.values.iter().map(|w| w.norm()).fold(0.0f64, f64::max);
    let ymax = d
        .grid()
        .iter()
        .zip(&s.y)
        .map(|(z, y)| (y - (z + alpha)).norm())
        .fold(0.0f64, f64::max);

    let quad = RationalMap::parse("y + y^2").unwrap();
    let nq = abel_normalize(&quad, c64(0.0, 0.0), 20, 1e-12).map_err(|e| e.to_string())?;
    let beta = nq.beta();
    let nfq =
        AbelNormalForm::from_normalization(&nq, c64(0.0, 0.0), 0.5).map_err(|e| e.to_string())?;
    let dq = StripDomain::lattice(50.0, 1.0, Side::Left, 2, 4).unwrap();
    let sq = abel_solve(&nfq, &dq, &AbelOptions::default()).map_err(|e| e.to_string())?;
    let bound_ok = dq
        .grid()
        .iter()
        .zip(&sq.w.values)
        .all(|(z, w)| w.norm() <= z.norm().powf(-0.5));
    let res = sq.w.max_residual();
    check(
        cmax <= 1e-20 && wmax <= 1e-10 && ymax <= 1e-10 && (beta - 1.0).norm() <= 1e-12 && bound_ok && res <= 1e-6,
        format!("max|c_j| {cmax:.1e}, ‖W‖ {wmax:.1e}, β {beta:.3}, |W| ≤ |z|^-1/2: {bound_ok}, residual {res:.1e}"),
    )
}

fn contraction() -> Outcome {
    let (e, d) = doubling_setup();
    let opts = SolveOptions::default();
    let op = PicardOperator::new(&e, c64(1.0, 0.0), &d, &opts).map_err(|e| e.to_string())?;
    let l1 = contraction_probe(&op, 50, 42).map_err(|e| e.to_string())?;
    let u1 = uniqueness_probe(&op, opts.max_iter, opts.tol, 42).map_err(|e| e.to_string())?;

    let quad = RationalMap::parse("y + y^2").unwrap();
    let nq = abel_normalize(&quad, c64(0.0, 0.0), 20, 1e-12).map_err(|e| e.to_string())?;
    let nfq =
        AbelNormalForm::from_normalization(&nq, c64(0.0, 0.0), 0.5).map_err(|e| e.to_string())?;
    let dq = StripDomain::lattice(50.0, 1.0, Side::Left, 2, 4).unwrap();
    let ao = AbelOptions::default();
    let aop = AbelOperator::new(&nfq, &dq, ao.padding, ao.j_max).map_err(|e| e.to_string())?;
    let l2 = contraction_probe(&aop, 50, 42).map_err(|e| e.to_string())?;
    let u2 = uniqueness_probe(&aop, ao.max_iter, ao.tol, 42).map_err(|e| e.to_string())?;
    check(
        l1 < 1.0 && l2 < 1.0 && u1 <= 10.0 * opts.tol && u2 <= 10.0 * ao.tol,
        format!("Lipschitz {l1:.2e} / {l2:.2e}, uniqueness gaps {u1:.1e} / {u2:.1e}"),
    )
}

fn model_coefficients() -> Outcome {
    let lam = c64(0.5, 0.0);
    let ms = model_series(lam, c64(-1.0, 0.0), 200).map_err(|e| e.to_string())?;
    let g2 = ms.series.coeff(2);
    let g3 = ms.series.coeff(3);
    // Coefficients of g(λw) − λg(w) − g(w)² in the stored variable.
    let a = ms.series.scaled_coeffs();
    let mut worst = 0.0f64;
    for n in 1..a.len() {
        let conv: C64 = (1..n).map(|k| a[k] * a[n - k]).sum();
        worst = worst.max((a[n] * (lam.powi(n as i32) - lam) - conv).norm());
    }
    // Same coefficients in double-double.
    let dd = model_series(
        Cdd::new(DoubleDouble::of(0.5), DoubleDouble::of(0.0)),
        Cdd::new(-DoubleDouble::of(1.0), DoubleDouble::of(0.0)),
        40,
    )
    .map_err(|e| e.to_string())?;
    let third = DoubleDouble::of(-64.0) / DoubleDouble::of(3.0);
    let dd_err = (dd.series.coeff(2).re + DoubleDouble::of(4.0))
        .abs()
        .f64()
        .max((dd.series.coeff(3).re - third).abs().f64());
    check(
        (g2 - c64(-4.0, 0.0)).norm() <= 1e-14
            && (g3 - c64(-64.0 / 3.0, 0.0)).norm() <= 1e-13
            && worst <= 1e-10
            && dd_err <= 1e-28,
        format!("g2 = {:.15}, g3 = {:.15}, coefficient residual {worst:.1e}, double-double error {dd_err:.1e}", g2.re, g3.re),
    )
}

fn radius() -> Outcome {
    let ms = model_series(c64(0.5, 0.0), c64(-1.0, 0.0), 300).map_err(|e| e.to_string())?;
    let r = find_rhat(&ms, 1e-13).map_err(|e| e.to_string())?;
    let est = estimate_radius(&ms.series).map_err(|e| e.to_string())?;
    let rel = (r - est).abs() / est;
    let at = ms.eval(c64(0.5 * r, 0.0));
    let psi = (at + 1.0 / 16.0).norm();
    check(
        r >= 1.0 / 16.0 && rel <= 1e-3 && psi <= 1e-8,
        format!("r̂ = {r:.12}, estimate {est:.12} (rel {rel:.1e}), |g(λr̂)+λ²/4| = {psi:.1e}"),
    )
}

fn monodromy_check() -> Outcome {
    let ms = half();
    let lam = ms.lambda;
    let one = monodromy(&ms, 0, 0.3, &[], 1, 1e-8).map_err(|e| e.to_string())?;
    let two = monodromy(&ms, 0, 0.3, &[], 2, 1e-8).map_err(|e| e.to_string())?;
    let e1 = (one.end_value + lam + one.start_value).norm();
    let e2 = (two.end_value - two.start_value).norm();
    let g = build_surface(&ms, 2, &SurfaceOptions::default()).map_err(|e| e.to_string())?;
    let mut maps = Vec::new();
    for (from, to) in [("0", "10"), ("1", "11")] {
        let r =
            monodromy(&ms, 1, 0.3, g.germ(from).unwrap(), 1, 1e-8).map_err(|e| e.to_string())?;
        let target = sheet_element(&ms, g.germ(to).unwrap(), r.end.point())
            .map_err(|e| e.to_string())?
            .value();
        maps.push(r.swapped && (r.end_value - target).norm() <= 1e-6);
    }
    check(
        one.swapped && e1 <= 1e-6 && !two.swapped && e2 <= 1e-6 && maps.iter().all(|&m| m),
        format!("one loop off by {e1:.1e}, two loops off by {e2:.1e}, index-1 maps h0→h10, h1→h11: {maps:?}"),
    )
}

fn surface_structure() -> Outcome {
    let ms = half();
    let g = build_surface(&ms, 3, &SurfaceOptions::default()).map_err(|e| e.to_string())?;
    let edge = |n: usize, a: &str, b: &str| Edge {
        n,
        a: a.into(),
        b: b.into(),
    };
    let low: Vec<&Edge> = g.edges.iter().filter(|e| e.n < 2).collect();
    let low_ok = low == [&edge(0, "0", "1"), &edge(1, "0", "10"), &edge(1, "1", "11")];
    let mut covered: Vec<&str> = g
        .edges_at(2)
        .flat_map(|e| [e.a.as_str(), e.b.as_str()])
        .collect();
    let idx2 = covered.len() / 2;
    covered.sort();
    let once = covered.len() == 8 && covered.windows(2).all(|w| w[0] != w[1]);
    let rep = sheet_identity_check(&ms, &g, 100, 42).map_err(|e| e.to_string())?;
    let worst = rep
        .residuals
        .iter()
        .filter(|r| r.expected_zero)
        .map(|r| r.max_residual)
        .fold(0.0f64, f64::max);
    let control = rep.get("h1_in_original").map_or(0.0, |r| r.max_residual);
    check(
        g.sheets.len() == 8 && low_ok && idx2 == 4 && once && worst <= 1e-8,
        format!(
            "{} sheets, index-2 edges {:?}, identity residual {worst:.1e} (control {control:.1e})",
            g.sheets.len(),
            g.edges_at(2)
                .map(|e| format!("{}-{}", e.a, e.b))
                .collect::<Vec<_>>()
        ),
    )
}

fn origin_regular() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for lam in [0.3, 0.5, 0.7] {
        let rep = claim4_sequences(lam, 12, 1e-6).map_err(|e| e.to_string())?;
        let ms = model_series(c64(lam, 0.0), c64(-1.0, 0.0), 300).map_err(|e| e.to_string())?;
        let r = find_rhat(&ms, 1e-13).map_err(|e| e.to_string())?;
        let ms = ms.with_rhat(r);
        let g = build_surface(&ms, 3, &SurfaceOptions::default()).map_err(|e| e.to_string())?;
        let swapped = origin_loops(&ms, &g, 0.3 * r, 1e-8).map_err(|e| e.to_string())?;
        ok &= rep.min_e_gap > 1e-6 && swapped.is_empty();
        detail.push(format!(
            "λ={lam}: min gap {:.2e}, swapped {swapped:?}",
            rep.min_e_gap
        ));
    }
    check(ok, detail.join("; "))
}

fn mahler() -> Outcome {
    let p = to_mahler(c64(0.5, 0.0), 42);
    let y = mahler_laurent(p.c, 200).map_err(|e| e.to_string())?;
    let a = y.scaled_coeffs();
    let coeffs_ok = a[0] == c64(1.0, 0.0) && a[1] == c64(0.0, 0.0) && a[2] == c64(-3.0 / 32.0, 0.0);
    let res = laurent_residual(&y, p.c, 0.7, 512);
    let st = strips(2).map_err(|e| e.to_string())?;
    let ln2 = std::f64::consts::LN_2;
    let strip_err = st
        .iter()
        .map(|s| {
            let k = s.n as f64;
            let lo = ((4.0 * k - 1.0) * std::f64::consts::PI / 2.0).ln() / ln2;
            let hi = ((4.0 * k + 1.0) * std::f64::consts::PI / 2.0).ln() / ln2;
            (s.lower - lo).abs().max((s.upper - hi).abs())
        })
        .fold(0.0f64, f64::max);
    let angles = [0.0, 0.7, 1.9, 3.1, 4.4];
    let radii = [0.6, 0.8, 0.9, 0.95, 0.99, 0.995, 0.999];
    let opts = ProbeOptions::default();
    let one =
        boundary_probe(c64(3.0 / 16.0, 0.0), &angles, &radii, &opts).map_err(|e| e.to_string())?;
    let far = [0.6, 0.9, 0.99, 0.999, 0.9999, 0.99999];
    let two = boundary_probe(c64(0.3, 0.0), &[0.0], &far, &opts).map_err(|e| e.to_string())?;
    check(
        p.c == c64(3.0 / 16.0, 0.0)
            && p.case == MahlerCase::Case1
            && coeffs_ok
            && res <= 1e-10
            && strip_err <= 1e-12
            && one.max_abs() < 1e3
            && one.events.is_empty()
            && !two.events.is_empty(),
        format!(
            "c = {}, residual {res:.1e}, strip error {strip_err:.1e}, case-1 max |Y| {:.3}, case-2 events {}",
            p.c.re,
            one.max_abs(),
            two.events.len()
        ),
    )
}

fn right_strip() -> Outcome {
    let e = EquationSpec::from_config("lambda=0.5\na2=1").unwrap();
    let d = StripDomain::lattice(10.0, 1.0, Side::Right, 2, 8).unwrap();
    let f = picard_solve(&e, c64(-1.0, 0.0), &d, &SolveOptions::default())
        .map_err(|e| e.to_string())?;
    let ms = model_series(c64(0.5, 0.0), c64(-1.0, 0.0), 200).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (z, w) in d.grid().iter().zip(&f.values) {
        let t = lambda_pow(e.lambda(), *z);
        let g = evaluate_sheet(ms.lambda, &ms.series, t, &[]).map_err(|e| e.to_string())?;
        worst = worst.max((t * w - g).norm());
    }
    let res = f.max_residual();
    check(
        res <= 1e-8 && worst <= 1e-6,
        format!("residual {res:.1e}, gap to the sheet {worst:.1e}"),
    )
}

fn artifacts() -> Vec<String> {
    let ms = half();
    let g = build_surface(&ms, 3, &SurfaceOptions::default()).unwrap();
    let ids = sheet_identity_check(&ms, &g, 30, 42).unwrap();
    let (e, d) = doubling_setup();
    let f = picard_solve(&e, c64(1.0, 0.0), &d, &SolveOptions::default()).unwrap();
    let probe = boundary_probe(
        c64(0.3, 0.0),
        &[0.0, 1.0],
        &[0.6, 0.99, 0.99999],
        &ProbeOptions::default(),
    )
    .unwrap();
    vec![
        serde_json::to_string(&g.to_json()).unwrap(),
        serde_json::to_string(&ids).unwrap(),
        f.to_grid_sample(Metadata::new("solve-left", serde_json::json!({"seed": 42})))
            .to_csv(),
        serde_json::to_string(&probe).unwrap(),
    ]
}

fn determinism() -> Outcome {
    let a = artifacts();
    let b = artifacts();
    let same = a.iter().zip(&b).filter(|(x, y)| x == y).count();
    check(
        same == a.len(),
        format!("{same}/{} artifacts byte-identical", a.len()),
    )
}

/// Runs without the libtest harness so the per-check lines always print.
fn main() {
    type Check = (&'static str, fn() -> Outcome, u64);
    let checks: [Check; 11] = [
        ("closed-form oracle", closed_form, 10),
        ("parabolic oracle", parabolic, 30),
        ("contraction", contraction, 30),
        ("model series", model_coefficients, 1),
        ("radius consistency", radius, 5),
        ("monodromy", monodromy_check, 20),
        ("surface structure", surface_structure, 120),
        ("origin is regular", origin_regular, 60),
        ("mahler", mahler, 60),
        ("right strip", right_strip, 10),
        ("determinism", determinism, 120),
    ];
    let mut failed = Vec::new();
    for (i, (name, run, budget)) in checks.iter().enumerate() {
        let t0 = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let took = t0.elapsed();
        let slow = took > Duration::from_secs(*budget);
        let (tag, detail) = match (&out, slow) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget} s budget")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        println!(
            "[{tag}] {:>2}. {name} ({:.2} s): {detail}",
            i + 1,
            took.as_secs_f64()
        );
        if tag == "FAIL" {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed checks: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} checks passed", checks.len());
}
