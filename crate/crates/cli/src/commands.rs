use std::collections::BTreeMap;
use std::path::PathBuf;

use diffeq_core::continuation::{monodromy, sheet_chain, sheet_element};
use diffeq_core::equation::{
    abel_normalize, fixed_points, EquationSpec, FixedPointClass, RationalMap, Side,
};
use diffeq_core::io::{write_text, GridSample, Metadata, PlaneTag, FORMAT_VERSION};
use diffeq_core::mahler::{
    boundary_probe, laurent_residual, mahler_laurent, strip_boundaries, strips, to_mahler,
    MahlerCase, ProbeOptions,
};
use diffeq_core::picard::{
    abel_solve, contraction_probe, escalate, forward_telescope, picard_solve, scaled_residual,
    AbelNormalForm, AbelOptions, PicardOperator, SolveOptions, StripDomain, Truncation,
};
use diffeq_core::scalar::to_pair;
use diffeq_core::surface::{
    build_surface, estimate_radius, find_rhat, majorant_bound, model_series, sheet_identity_check,
    ModelSolution, SurfaceOptions,
};
use diffeq_core::{cx, Cplx, Error, Scalar};
use serde_json::{json, Value};

use crate::config::{CplxArg, Resolver};
use crate::{CliError, Command, EquationArgs, Format, Global, ModelArgs, StripArgs};

/// Random pairs drawn by the contraction probe before a strip is accepted.
const PROBE_PAIRS: usize = 20;

pub struct Context {
    global: Global,
    res: Resolver,
    bits: u32,
}

impl Context {
    pub fn new(global: Global, file: BTreeMap<String, String>, bits: u32) -> Self {
        Context {
            global,
            res: Resolver::new(file),
            bits,
        }
    }
}

/// A finished run: the artifact text and a one-line summary.
pub struct Outcome {
    artifact: String,
    summary: String,
    out: Option<PathBuf>,
}

impl Outcome {
    /// Writes the artifact to the output file (summary on stdout), or to
    /// stdout (summary on stderr) when no file was named.
    pub fn emit(self) -> Result<(), CliError> {
        match &self.out {
            Some(path) => {
                write_text(path, &self.artifact)?;
                println!("{}", self.summary);
            }
            None => {
                print!("{}", self.artifact);
                if !self.artifact.ends_with('\n') {
                    println!();
                }
                eprintln!("{}", self.summary);
            }
        }
        Ok(())
    }
}

fn pair<T: Scalar>(z: Cplx<T>) -> [f64; 2] {
    let (a, b) = to_pair(z);
    [a + 0.0, b + 0.0]
}

fn c<T: Scalar>(a: CplxArg) -> Cplx<T> {
    cx(a.0, a.1)
}

/// Short human form of a complex number for summaries.
fn show<T: Scalar>(z: Cplx<T>) -> String {
    let [re, im] = pair(z);
    let trim = |x: f64| {
        let x = if x.abs() < 1e-12 { 0.0 } else { x };
        let s = format!("{x:.10}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".to_string()
        } else {
            s.to_string()
        }
    };
    if im.abs() <= 1e-12 * re.abs().max(1.0) {
        trim(re)
    } else {
        format!(
            "{}{}{}i",
            trim(re),
            if im < 0.0 { "-" } else { "+" },
            trim(im.abs())
        )
    }
}

fn class_name(c: FixedPointClass) -> &'static str {
    match c {
        FixedPointClass::Expanding => "expanding",
        FixedPointClass::Contracting => "contracting",
        FixedPointClass::Parabolic => "parabolic",
        FixedPointClass::Superattracting => "superattracting",
        FixedPointClass::Neutral => "neutral",
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Settings shared by every command, resolved and validated.
struct Common<T> {
    tol: T,
    max_iter: usize,
    seed: u64,
    format: Option<Format>,
    out: Option<PathBuf>,
}

fn common<T: Scalar>(ctx: &mut Context) -> Result<Common<T>, CliError> {
    let floor = 2f64.powf(-(ctx.bits as f64) / 2.0);
    let res = &mut ctx.res;
    res.record("precision", ctx.bits.into());
    let tol = res.get("tol", ctx.global.tol, floor.max(1e-12))?;
    if !(tol >= floor) {
        return Err(CliError::Validation(format!(
            "tol {tol:e} is below 2^(-{}/2) = {floor:e}",
            ctx.bits
        )));
    }
    let max_iter = res.get("max_iter", ctx.global.max_iter, 200usize)?;
    let seed = res.get("seed", ctx.global.seed, 42u64)?;
    let format = match ctx.global.format {
        Some(f) => Some(f),
        None => match res.file().get("format").map(String::as_str) {
            Some("csv") => Some(Format::Csv),
            Some("json") => Some(Format::Json),
            Some(other) => {
                return Err(CliError::Validation(format!(
                    "config key format: {other:?}"
                )))
            }
            None => None,
        },
    };
    let out = ctx
        .global
        .out
        .clone()
        .or_else(|| res.file().get("out").map(PathBuf::from));
    Ok(Common {
        tol: T::of(tol),
        max_iter,
        seed,
        format,
        out,
    })
}

impl<T> Common<T> {
    /// Explicit format, else from the output file's extension, else CSV.
    fn grid_format(&self) -> Format {
        self.format.unwrap_or_else(|| {
            match self
                .out
                .as_ref()
                .and_then(|p| p.extension())
                .and_then(|e| e.to_str())
            {
                Some("json") => Format::Json,
                _ => Format::Csv,
            }
        })
    }
}

fn metadata(cmd: &str, res: &Resolver, seed: u64) -> Metadata {
    let mut echo = res.echo();
    echo["version"] = env!("CARGO_PKG_VERSION").into();
    let mut m = Metadata::new(cmd, echo);
    m.seed = Some(seed);
    m
}

fn grid_outcome(sample: GridSample, common: &Common<impl Scalar>, summary: String) -> Outcome {
    let artifact = match common.grid_format() {
        Format::Csv => sample.to_csv(),
        Format::Json => sample.to_json() + "\n",
    };
    Outcome {
        artifact,
        summary,
        out: common.out.clone(),
    }
}

fn json_outcome(v: Value, common: &Common<impl Scalar>, summary: String) -> Outcome {
    Outcome {
        artifact: pretty(&v),
        summary,
        out: common.out.clone(),
    }
}

struct Model<T: Scalar> {
    lambda: Cplx<T>,
    g1: Cplx<T>,
    order: usize,
}

fn model_args<T: Scalar>(
    res: &mut Resolver,
    m: &ModelArgs,
    order: usize,
) -> Result<Model<T>, CliError> {
    let lambda = res.require("lambda", m.lambda)?;
    let g1 = res.get("g1", m.g1, CplxArg(-1.0, 0.0))?;
    let order = res.get("order", m.order, order)?;
    Ok(Model {
        lambda: c(lambda),
        g1: c(g1),
        order,
    })
}

/// The model series with its branch radius located.
fn located<T: Scalar>(m: &Model<T>, tol: T) -> Result<ModelSolution<T>, CliError> {
    let ms = model_series(m.lambda, m.g1, m.order)?;
    let r = find_rhat(&ms, tol)?;
    Ok(ms.with_rhat(r))
}

/// Germ of the sheet named `label`; labels longer than one digit are
/// assigned by the surface construction.
fn germ_of<T: Scalar>(ms: &ModelSolution<T>, label: &str) -> Result<Vec<Cplx<T>>, CliError> {
    match label {
        "0" => Ok(vec![]),
        "1" => Ok(vec![-ms.lambda]),
        _ if !label.is_empty() && label.chars().all(|ch| ch == '0' || ch == '1') => {
            let g = build_surface(ms, label.len(), &SurfaceOptions::default())?;
            Ok(g.germ(label)?.to_vec())
        }
        _ => Err(CliError::Validation(format!("bad sheet label {label:?}"))),
    }
}

fn equation<T: Scalar>(res: &mut Resolver, eq: &EquationArgs) -> Result<EquationSpec<T>, CliError> {
    let mut kv: BTreeMap<String, String> = res.file().clone();
    for e in &eq.entries {
        let (k, v) = e
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("--eq {e:?}: expected key=value")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let spec = match kv.get("map") {
        Some(src) => EquationSpec::autonomous(RationalMap::parse(src)?)?,
        None => EquationSpec::from_pairs(&kv)?,
    };
    res.record("equation", spec.echo());
    Ok(spec)
}

struct Strip {
    rho: f64,
    sigma: f64,
    per_unit: usize,
    width: usize,
}

fn strip_args(
    res: &mut Resolver,
    s: &StripArgs,
    rho: f64,
    width: usize,
) -> Result<Strip, CliError> {
    let st = Strip {
        rho: res.get("rho", s.rho, rho)?,
        sigma: res.get("sigma", s.sigma, 1.0)?,
        per_unit: res.get("per_unit", s.per_unit, 2usize)?,
        width: res.get("width", s.width, width)?,
    };
    if !(st.rho > 0.0 && st.sigma > 0.0) || st.per_unit == 0 || st.width == 0 {
        return Err(CliError::Validation(
            "strip needs rho > 0, sigma > 0, per_unit ≥ 1, width ≥ 1".into(),
        ));
    }
    Ok(st)
}

pub fn run<T: Scalar>(cmd: &Command, mut ctx: Context) -> Result<Outcome, CliError> {
    match cmd {
        Command::Classify { map } => classify::<T>(&mut ctx, map.clone()),
        Command::Series { model } => series::<T>(&mut ctx, model),
        Command::Radius { model } => radius::<T>(&mut ctx, model),
        Command::Surface {
            model,
            depth,
            radius_factor,
            identities,
        } => surface::<T>(&mut ctx, model, *depth, *radius_factor, *identities),
        Command::Monodromy {
            model,
            index,
            sheet,
            loops,
            radius_factor,
        } => monodromy_cmd::<T>(
            &mut ctx,
            model,
            *index,
            sheet.clone(),
            *loops,
            *radius_factor,
        ),
        Command::SolveLeft {
            eq,
            strip,
            k,
            ball,
            rho_cap,
        } => solve::<T>(&mut ctx, Side::Left, eq, strip, *k, *ball, *rho_cap),
        Command::SolveRight {
            eq,
            strip,
            k,
            ball,
            rho_cap,
        } => solve::<T>(&mut ctx, Side::Right, eq, strip, *k, *ball, *rho_cap),
        Command::Abel {
            map,
            gamma,
            alpha,
            strip,
            padding,
            delta,
            j,
        } => abel::<T>(
            &mut ctx,
            map.clone(),
            *gamma,
            *alpha,
            strip,
            *padding,
            *delta,
            *j,
        ),
        Command::Telescope { eq, strip, k } => telescope::<T>(&mut ctx, eq, strip, *k),
        Command::Mahler {
            lambda,
            c: cval,
            order,
            probe,
            points,
        } => mahler::<T>(&mut ctx, *lambda, *cval, *order, probe, *points),
        Command::Strips { n_max } => strips_cmd::<T>(&mut ctx, *n_max),
        Command::Grid {
            model,
            sheet,
            re_min,
            re_max,
            im_min,
            im_max,
            step,
        } => grid::<T>(
            &mut ctx,
            model,
            sheet.clone(),
            [*re_min, *re_max, *im_min, *im_max],
            *step,
        ),
    }
}

fn classify<T: Scalar>(ctx: &mut Context, map: Option<String>) -> Result<Outcome, CliError> {
    let common = common::<T>(ctx)?;
    let src: String = ctx.res.require("map", map)?;
    let r = RationalMap::<T>::parse(&src)?;
    let s = fixed_points(&r, common.tol)?;
    let points: Vec<Value> = s
        .points
        .iter()
        .map(|p| {
            json!({
                "gamma": pair(p.gamma),
                "multiplier": pair(p.multiplier),
                "class": p.class,
                "multiplicity": p.multiplicity,
            })
        })
        .collect();
    let summary = s
        .points
        .iter()
        .map(|p| {
            format!(
                "({}, {}) {}",
                show(p.gamma),
                show(p.multiplier),
                class_name(p.class)
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    let v = json!({
        "formatVersion": FORMAT_VERSION,
        "fixedPoints": points,
        "infinity": s.infinity.map(pair),
        "juliaWitness": s.julia_witness,
        "metadata": metadata("classify", &ctx.res, common.seed),
    });
    Ok(json_outcome(v, &common, summary))
}

fn series<T: Scalar>(ctx: &mut Context, m: &ModelArgs) -> Result<Outcome, CliError> {
    let common = common::<T>(ctx)?;
    let model = model_args::<T>(&mut ctx.res, m, 50)?;
    let ms = model_series(model.lambda, model.g1, model.order)?;
    let g = |n: i32| show(ms.series.coeff(n));
    let summary = if model.order >= 3 {
        format!("order {}: g2 = {}, g3 = {}", model.order, g(2), g(3))
    } else {
        format!("order {}", model.order)
    };
    let v = json!({
        "formatVersion": FORMAT_VERSION,
        "lambda": pair(ms.lambda),
        "g1": pair(ms.g1),
        "radiusLowerBound": ms.radius_lower_bound.f64(),
        "series": ms.series.to_json(),
        "metadata": metadata("series", &ctx.res, common.seed),
    });
    Ok(json_outcome(v, &common, summary))
}

fn radius<T: Scalar>(ctx: &mut Context, m: &ModelArgs) -> Result<Outcome, CliError> {
    let common = common::<T>(ctx)?;
    let model = model_args::<T>(&mut ctx.res, m, 300)?;
    let bound = majorant_bound(model.lambda, model.g1)?;
    let ms = located(&model, common.tol)?;
    let est = estimate_radius(&ms.series)?;
    let r = ms.r_hat.expect("located");
    let w0 = ms.branch_point()?;
    let l = ms.lambda;
    let psi = (ms.eval(l * w0) + l * l / T::of(4.0)).norm();
    let v = json!({
        "formatVersion": FORMAT_VERSION,
        "majorantBound": bound.f64(),
        "estimate": est.f64(),
        "rHat": r.f64(),
        "branchPoint": pair(w0),
        "psi": psi.f64(),
        "metadata": metadata("radius", &ctx.res, common.seed),
    });
    let summary = format!(
        "r̂ = {:.12}, tail estimate {:.12}, majorant bound {:.6}, |g(λw₀) + λ²/4| = {:.1e}",
        r.f64(),
        est.f64(),
        bound.f64(),
        psi.f64()
    );
    Ok(json_outcome(v, &common, summary))
}

fn surface<T: Scalar>(
    ctx: &mut Context,
    m: &ModelArgs,
    depth: Option<usize>,
    factor: Option<f64>,
    identities: Option<usize>,
) -> Result<Outcome, CliError> {
    let common = common::<T>(ctx)?;
    let model = model_args::<T>(&mut ctx.res, m, 300)?;
    let depth = ctx.res.get("depth", depth, 2usize)?;
    let factor = ctx.res.get("radius_factor", factor, 0.3)?;
    let samples = ctx.res.get("identities", identities, 0usize)?;
    let ms = located(&model, common.tol)?;
    let opts = SurfaceOptions {
        radius_factor: T::of(factor),
        ..SurfaceOptions::default()
    };
    let g = build_surface(&ms, depth, &opts)?;
    let report = if samples > 0 {
        Some(sheet_identity_check(&ms, &g, samples, common.seed)?)
    } else {
        None
    };
    let summary = format!(
        "{} sheets, {} edges, r̂ = {:.12}",
        g.sheets.len(),
        g.edges.len(),
        g.r_hat.f64()
    );
    let v = json!({
        "formatVersion": FORMAT_VERSION,
        "surface": g.to_json(),
        "identities": report,
        "metadata": metadata("surface", &ctx.res, common.seed),
    });
    Ok(json_outcome(v, &common, summary))
}

fn monodromy_cmd<T: Scalar>(
    ctx: &mut Context,
    m: &ModelArgs,
    index: Option<usize>,
    sheet: Option<String>,
    loops: Option<u32>,
    factor: Option<f64>,
) -> Result<Outcome, CliError> {
    let common = common::<T>(ctx)?;
    let model = model_args::<T>(&mut ctx.res, m, 300)?;
    let index = ctx.res.get("index", index, 0usize)?;
    let sheet = ctx.res.get("sheet", sheet, "0".to_string())?;
    let loops = ctx.res.get("loops", loops, 1u32)?;
    let factor = ctx.res.get("radius_factor", factor, 0.3)?;
    let ms = located(&model, common.tol)?;
    let germ = germ_of(&ms, &sheet)?;
    let r = monodromy(&ms, index, T::of(factor), &germ, loops, common.tol)?;
    let meta = metadata("monodromy", &ctx.res, common.seed);
    let summary = format!(
        "{} loop(s) around w_{index} from sheet {sheet}: {} → {} ({})",
        r.loops,
        show(r.start_value),
        show(r.end_value),
        if r.swapped { "swapped" } else { "unswapped" }
    );
    let v = json!({
        "formatVersion": FORMAT_VERSION,
        "center": pair(ms.ladder_point(index)?),
        "startValue": pair(r.start_value),
        "endValue": pair(r.end_value),
        "loops": r.loops,
        "swapped": r.swapped,
        "end": r.end.to_path_json(meta.clone()),
        "metadata": meta,
    });
    Ok(json_outcome(v, &common, summary))
}

#[allow(clippy::too_many_arguments)]
fn solve<T: Scalar>(
    ctx: &mut Context,
    side: Side,
    eqa: &EquationArgs,
    sa: &StripArgs,
    k: Option<usize>,
    ball: Option<f64>,
    rho_cap: Option<f64>,
) -> Result<Outcome, CliError> {
    let common = common::<T>(ctx)?;
    let name = match side {
        Side::Left => "solve-left",
        Side::Right => "solve-right",
    };
    let eq = equation::<T>(&mut ctx.res, eqa)?;
    let alpha = c::<T>(ctx.res.require("alpha", eqa.alpha)?);
    let st = strip_args(&mut ctx.res, sa, 10.0, 10)?;
    let j = ctx.res.get("j", eqa.j, 20usize)?;
    let k = ctx.res.get("k", k, 0usize)?;
    let ball = ctx.res.get("ball", ball, 1.0)?;
    let cap = ctx.res.get("rho_cap", rho_cap, 16.0 * st.rho)?;
    ctx.res.record("probe_pairs", PROBE_PAIRS.into());
    let opts = SolveOptions {
        truncation: Truncation { k, j },
        max_iter: common.max_iter,
        tol: common.tol,
        ball: T::of(ball),
        ..SolveOptions::default()
    };
    let seed = common.seed;
    let esc = escalate(T::of(st.rho), T::of(cap), |rho| {
        let d = StripDomain::lattice(rho, T::of(st.sigma), side, st.per_unit, st.width)?;
        let op = PicardOperator::new(&eq, alpha, &d, &opts)?;
        let lip = contraction_probe(&op, PROBE_PAIRS, seed)?;
        if lip >= T::one() {
            return Ok((None, lip));
        }
        Ok((Some(picard_solve(&eq, alpha, &d, &opts)?), lip))
    })
    .map_err(|e| match e {
        // No strip up to the cap contracts.
        Error::Degenerate(m) => CliError::Numerical(m),
        e => e.into(),
    })?;
    let f = esc.solution.expect("accepted attempts carry a solution");
    ctx.res.record("rho_accepted", esc.rho.f64().into());
    let summary = format!(
        "{name}: {} points, ρ = {}, Lipschitz {:.2e}, {} iterations, max residual {:.2e}",
        f.values.len(),
        esc.rho.f64(),
        esc.lipschitz.f64(),
        f.iterations,
        f.max_residual().f64()
    );
    let sample = f.to_grid_sample(metadata(name, &ctx.res, seed));
    Ok(grid_outcome(sample, &common, summary))
}

#[allow(clippy::too_many_arguments)]
fn abel<T: Scalar>(
    ctx: &mut Context,
    map: Option<String>,
    gamma: Option<CplxArg>,
    alpha: Option<CplxArg>,
    sa: &StripArgs,
    padding: Option<usize>,
    delta: Option<f64>,
    j: Option<usize>,
) -> Result<Outcome, CliError> {
    let common = common::<T>(ctx)?;
    let res = &mut ctx.res;
    let src: String = res.require("map", map)?;
    let gamma = c::<T>(res.get("gamma", gamma, CplxArg(0.0, 0.0))?);
    let alpha = c::<T>(res.get("alpha", alpha, CplxArg(0.0, 0.0))?);
    let st = strip_args(res, sa, 50.0, 4)?;
    let padding = res.get("padding", padding, AbelOptions::<T>::default().padding)?;
    let delta = res.get("delta", delta, 0.5)?;
    let j = res.get("j", j, 20usize)?;
    let r = RationalMap::<T>::parse(&src)?;
    let n = abel_normalize(&r, gamma, j, common.tol)?;
    let nf = AbelNormalForm::from_normalization(&n, alpha, T::of(delta))?;
    let d = StripDomain::lattice(
        T::of(st.rho),
        T::of(st.sigma),
        Side::Left,
        st.per_unit,
        st.width,
    )?;
    let s = abel_solve(
        &nf,
        &d,
        &AbelOptions {
            j_max: j,
            padding,
            max_iter: common.max_iter,
            tol: common.tol,
        },
    )?;
    let summary = format!(
        "abel: m = {}, β = {}, {} points, sup |W|·|z|^(1−δ) = {:.2e}, max residual {:.2e}, third-bound ratios {:.2e}/{:.2e}/{:.2e}",
        n.m,
        show(n.beta()),
        s.y.len(),
        s.bound_ratio().f64(),
        s.w.max_residual().f64(),
        s.checks.ratios[0],
        s.checks.ratios[1],
        s.checks.ratios[2]
    );
    let meta = metadata("abel", &ctx.res, common.seed);
    let sample = GridSample::new(
        PlaneTag::ZPlane,
        d.grid().iter().map(|&z| pair(z)).collect(),
        s.y.iter().map(|&y| pair(y)).collect(),
        s.w.residuals.iter().map(|r| r.map(|r| r.f64())).collect(),
        meta,
    )?;
    Ok(grid_outcome(sample, &common, summary))
}

fn telescope<T: Scalar>(
    ctx: &mut Context,
    eqa: &EquationArgs,
    sa: &StripArgs,
    k: Option<usize>,
) -> Result<Outcome, CliError> {
    let common = common::<T>(ctx)?;
    let eq = equation::<T>(&mut ctx.res, eqa)?;
    let alpha = c::<T>(ctx.res.require("alpha", eqa.alpha)?);
    let st = strip_args(&mut ctx.res, sa, 10.0, 10)?;
    let j = ctx.res.get("j", eqa.j, 8usize)?;
    let k = ctx.res.get("k", k, 60usize)?;
    let side = if eq.lambda().norm() > T::one() {
        Side::Left
    } else {
        Side::Right
    };
    let d = StripDomain::lattice(T::of(st.rho), T::of(st.sigma), side, st.per_unit, st.width)?;
    let mut values = Vec::with_capacity(d.grid().len());
    let mut residuals = Vec::with_capacity(d.grid().len());
    let mut worst = 0.0f64;
    for &z in d.grid() {
        let w = forward_telescope(&eq, alpha, z, k, j)?;
        let next = forward_telescope(&eq, alpha, z + T::one(), k, j)?;
        let r = scaled_residual(&eq, z, w, next)?.f64();
        worst = worst.max(r);
        values.push(pair(w));
        residuals.push(Some(r));
    }
    let summary = format!(
        "telescope: {} points, {k} steps, max residual {worst:.2e}",
        values.len()
    );
    let meta = metadata("telescope", &ctx.res, common.seed);
    let sample = GridSample::new(
        PlaneTag::ZPlane,
        d.grid().iter().map(|&z| pair(z)).collect(),
        values,
        residuals,
        meta,
    )?;
    Ok(grid_outcome(sample, &common, summary))
}

/// `angle=…,rmax=…` with `rmax` in `(start, 1)`.
fn parse_probe(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Validation(format!("--probe {s:?}: expected angle=…,rmax=…"));
    let mut angle = None;
    let mut rmax = None;
    for part in s.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(bad)?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        match k.trim() {
            "angle" => angle = Some(v),
            "rmax" => rmax = Some(v),
            _ => return Err(bad()),
        }
    }
    Ok((angle.ok_or_else(bad)?, rmax.ok_or_else(bad)?))
}

/// `n` radii from just above `start` to `rmax`, evenly spaced in
/// `log(1 − r)` so they crowd towards the unit circle.
fn probe_radii(start: f64, rmax: f64, n: usize) -> Vec<f64> {
    let (a, b) = ((1.0 - start).ln(), (1.0 - rmax).ln());
    (1..=n)
        .map(|i| 1.0 - (a + (b - a) * i as f64 / n as f64).exp())
        .collect()
}

fn mahler<T: Scalar>(
    ctx: &mut Context,
    lambda: Option<CplxArg>,
    cval: Option<f64>,
    order: Option<usize>,
    probes: &[String],
    points: Option<usize>,
) -> Result<Outcome, CliError> {
    let common = common::<T>(ctx)?;
    let res = &mut ctx.res;
    let lambda = res.opt("lambda", lambda)?;
    let cval = res.opt("c", cval)?;
    let order = res.get("order", order, 200usize)?;
    let (params, c) = match (lambda, cval) {
        (Some(l), None) => {
            let p = to_mahler::<T>(c(l), common.seed);
            let cc = p.c;
            (Some(p), cc)
        }
        (None, Some(v)) => (None, cx::<T>(v, 0.0)),
        _ => {
            return Err(CliError::Validation(
                "give exactly one of --lambda and --c".into(),
            ))
        }
    };
    if probes.is_empty() && res.file().get("probe").is_none() {
        let y = mahler_laurent(c, order)?;
        let resid = laurent_residual(&y, c, T::of(ProbeOptions::default().trust), 256);
        let case = match &params {
            Some(p) => p.case,
            None => diffeq_core::mahler::classify_c(c),
        };
        let summary = format!(
            "c = {}, {}, residual on |u| ≤ {} is {:.1e}",
            show(c),
            case_name(case),
            ProbeOptions::default().trust,
            resid.f64()
        );
        let v = json!({
            "formatVersion": FORMAT_VERSION,
            "lambda": params.as_ref().map(|p| pair(p.lambda)),
            "c": pair(c),
            "case": case,
            "identityResidual": params.as_ref().map(|p| p.identity_residual.f64()),
            "laurent": y.to_json(),
            "laurentResidual": resid.f64(),
            "metadata": metadata("mahler", res, common.seed),
        });
        return Ok(json_outcome(v, &common, summary));
    }
    let mut specs = probes.to_vec();
    if specs.is_empty() {
        specs.push(res.file()["probe"].clone());
    }
    res.record("probe", Value::from(specs.clone()));
    let n = res.get("points", points, 200usize)?;
    if n == 0 {
        return Err(CliError::Validation("--points must be at least 1".into()));
    }
    let opts = ProbeOptions {
        order,
        ..ProbeOptions::default()
    };
    let mut samples = Vec::new();
    let mut events = Vec::new();
    let mut case = MahlerCase::Other;
    for s in &specs {
        let (angle, rmax) = parse_probe(s)?;
        if !(rmax > opts.start && rmax < 1.0) {
            return Err(CliError::Validation(format!(
                "rmax must lie in ({}, 1)",
                opts.start
            )));
        }
        let rep = boundary_probe(c, &[angle], &probe_radii(opts.start, rmax, n), &opts)?;
        case = rep.case;
        samples.extend(rep.samples);
        events.extend(rep.events);
    }
    let max_abs = samples.iter().map(|s| s.abs_y).fold(0.0, f64::max);
    let summary = format!(
        "c = {}, {}: {} samples, max |Y| = {:.4e}, {} ambiguity event(s)",
        show(c),
        case_name(case),
        samples.len(),
        max_abs,
        events.len()
    );
    let meta = metadata("mahler", res, common.seed);
    let artifact = match common.grid_format() {
        Format::Csv => {
            let mut s = String::from("angle,track,r,abs_y,d_abs_y\n");
            for p in &samples {
                // The first sample of a track has no backward difference.
                let d = if p.d_abs_y.is_finite() {
                    format!("{:e}", p.d_abs_y)
                } else {
                    String::new()
                };
                s.push_str(&format!(
                    "{:e},{},{:e},{:e},{d}\n",
                    p.angle, p.track, p.r, p.abs_y
                ));
            }
            s
        }
        Format::Json => pretty(&json!({
            "formatVersion": FORMAT_VERSION,
            "c": pair(c),
            "case": case,
            "samples": samples,
            "events": events,
            "metadata": meta,
        })),
    };
    Ok(Outcome {
        artifact,
        summary,
        out: common.out.clone(),
    })
}

fn case_name(c: MahlerCase) -> &'static str {
    match c {
        MahlerCase::Case1 => "case 1",
        MahlerCase::Case2 => "case 2",
        MahlerCase::Other => "other",
    }
}

fn strips_cmd<T: Scalar>(ctx: &mut Context, n_max: Option<usize>) -> Result<Outcome, CliError> {
    let common = common::<T>(ctx)?;
    let n = ctx.res.get("n_max", n_max, 3usize)?;
    let s = strips(n)?;
    let summary = s
        .iter()
        .map(|s| format!("{}: ({:.6}, {:.6})", s.n, s.lower, s.upper))
        .collect::<Vec<_>>()
        .join("; ");
    let v = json!({
        "formatVersion": FORMAT_VERSION,
        "strips": s,
        "boundaries": strip_boundaries(2 * n),
        "metadata": metadata("strips", &ctx.res, common.seed),
    });
    Ok(json_outcome(v, &common, summary))
}

/// `min, min + step, …` up to `max` (inclusive up to rounding); values
/// within rounding of 0 are snapped to 0.
fn axis(min: f64, max: f64, step: f64) -> Vec<f64> {
    let n = ((max - min) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| min + step * i as f64)
        .map(|v| if v.abs() < 1e-9 * step { 0.0 } else { v })
        .collect()
}

fn grid<T: Scalar>(
    ctx: &mut Context,
    m: &ModelArgs,
    sheet: Option<String>,
    bounds: [Option<f64>; 4],
    step: Option<f64>,
) -> Result<Outcome, CliError> {
    let common = common::<T>(ctx)?;
    let model = model_args::<T>(&mut ctx.res, m, 300)?;
    let sheet = ctx.res.get("sheet", sheet, "0".to_string())?;
    let keys = ["re_min", "re_max", "im_min", "im_max"];
    let defaults = [-0.1, 0.1, -0.1, 0.1];
    let mut b = [0.0; 4];
    for i in 0..4 {
        b[i] = ctx.res.get(keys[i], bounds[i], defaults[i])?;
    }
    let step = ctx.res.get("step", step, 0.02)?;
    if !(step > 0.0) || !(b[1] >= b[0]) || !(b[3] >= b[2]) {
        return Err(CliError::Validation(
            "grid needs step > 0, re_max ≥ re_min and im_max ≥ im_min".into(),
        ));
    }
    let ms = located(&model, common.tol)?;
    let germ = germ_of(&ms, &sheet)?;
    let chain = sheet_chain(&ms, &germ);
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    let mut skipped = 0usize;
    for re in axis(b[0], b[1], step) {
        for im in axis(b[2], b[3], step) {
            let w: Cplx<T> = cx(re, im);
            match sheet_element(&ms, &germ, w) {
                Ok(e) => {
                    points.push(pair(w));
                    values.push(pair(e.value()));
                    residuals.push(e.consistency(&chain).ok().map(|r| r.f64()));
                }
                Err(err) if err.is_numerical() => skipped += 1,
                Err(err) => return Err(err.into()),
            }
        }
    }
    ctx.res.record("skipped", skipped.into());
    let summary = format!(
        "grid on sheet {sheet}: {} points, {skipped} skipped",
        points.len()
    );
    let meta = metadata("grid", &ctx.res, common.seed);
    let sample = GridSample::new(PlaneTag::WPlane, points, values, residuals, meta)?;
    Ok(grid_outcome(sample, &common, summary))
}
