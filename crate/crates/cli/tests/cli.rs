use std::f64::consts::LN_2;
use std::path::Path;
use std::process::{Command, Output};

use diffeq_core::io::{export_grid, ExportFormat, GridSample, Metadata, PlaneTag};
use serde_json::Value;

fn diffeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffeq"))
        .args(args)
        .env_remove("DIFFEQ_PRECISION")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json_out(args: &[&str]) -> Value {
    let o = diffeq(args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

#[test]
fn exit_codes() {
    let unknown = diffeq(&["frobnicate"]);
    assert_eq!(code(&unknown), 1);
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    assert_eq!(code(&diffeq(&[])), 1);
    assert_eq!(code(&diffeq(&["--help"])), 0);
    assert_eq!(code(&diffeq(&["series"])), 2);
    assert_eq!(code(&diffeq(&["series", "--lambda", "x"])), 2);
    assert_eq!(
        code(&diffeq(&["series", "--lambda", "0.5", "--tol", "1e-30"])),
        2
    );
    assert_eq!(code(&diffeq(&["--precision", "128", "strips"])), 2);
    assert_eq!(code(&diffeq(&["classify", "--map", "y +* 2"])), 2);
    let non_contracting = diffeq(&[
        "solve-left",
        "--eq",
        "lambda=2",
        "--eq",
        "a2=1",
        "--alpha",
        "1",
        "--ball",
        "50",
        "--rho",
        "0.5",
        "--rho-cap",
        "1",
    ]);
    assert_eq!(code(&non_contracting), 3);
}

#[test]
fn io_failure_is_a_validation_exit() {
    let o = diffeq(&["strips", "-o", "/nonexistent-dir/strips.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn classify_reports_multipliers() {
    let o = diffeq(&["classify", "--map", "(2*y+y^2)"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let pts = v["fixedPoints"].as_array().unwrap();
    let mut found: Vec<(f64, f64)> = pts
        .iter()
        .map(|p| {
            (
                p["gamma"][0].as_f64().unwrap(),
                p["multiplier"][0].as_f64().unwrap(),
            )
        })
        .collect();
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!((found[0].0 + 1.0).abs() < 1e-12 && found[0].1.abs() < 1e-12);
    assert!(found[1].0.abs() < 1e-12 && (found[1].1 - 2.0).abs() < 1e-12);
    let summary = String::from_utf8_lossy(&o.stderr);
    assert!(summary.contains("(0, 2) expanding"), "{summary}");
    assert!(summary.contains("(-1, 0) superattracting"), "{summary}");
}

#[test]
fn series_second_coefficient() {
    let v = json_out(&["series", "--lambda", "0.5", "--order", "50"]);
    let s = &v["series"];
    assert_eq!(s["minDegree"], 0);
    let scale = s["scale"].as_f64().unwrap_or(1.0);
    let g2 = s["coeffs"][2][0].as_f64().unwrap() / scale.powi(2);
    assert_eq!(g2, -4.0);
    assert_eq!(v["metadata"]["config"]["order"], 50);
}

#[test]
fn surface_of_depth_two() {
    let v = json_out(&["surface", "--lambda", "0.5", "--depth", "2"]);
    assert_eq!(
        v["surface"]["sheets"],
        serde_json::json!(["0", "1", "10", "11"])
    );
    assert_eq!(v["surface"]["edges"].as_array().unwrap().len(), 3);
}

#[test]
fn strips_match_the_closed_form() {
    let v = json_out(&["strips", "--n-max", "2"]);
    for (i, s) in v["strips"].as_array().unwrap().iter().enumerate() {
        let n = (i + 1) as f64;
        let b = |k: f64| (k * std::f64::consts::FRAC_PI_2).log2();
        assert!((s["lower"].as_f64().unwrap() - b(4.0 * n - 1.0)).abs() < 1e-12);
        assert!((s["upper"].as_f64().unwrap() - b(4.0 * n + 1.0)).abs() < 1e-12);
    }
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn solve_left_matches_the_closed_form_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "solve-left".to_string(),
            "--eq".into(),
            "lambda=2".into(),
            "--eq".into(),
            "a2=1".into(),
            "--alpha".into(),
            "1".into(),
            "--width".into(),
            "4".into(),
            "-o".into(),
            p.display().to_string(),
        ]
    };
    for p in [&a, &b] {
        let argv = args(p);
        let o = diffeq(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = read(&a);
    assert_eq!(text, read(&b));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("re_point,im_point,re_value,im_value,residual")
    );
    // w = (e^{2^z} − 1)·2^{−z}
    for line in lines {
        let f: Vec<f64> = line
            .split(',')
            .take(4)
            .map(|x| x.parse().unwrap())
            .collect();
        let (x, y) = (f[0] * LN_2, f[1] * LN_2);
        let (t_re, t_im) = (x.exp() * y.cos(), x.exp() * y.sin());
        // e^t − 1 without cancellation.
        let (s, c) = (t_im.sin(), t_im.cos());
        let e_re = t_re.exp_m1() * c - 2.0 * (t_im / 2.0).sin().powi(2);
        let e_im = t_re.exp() * s;
        let n = t_re * t_re + t_im * t_im;
        let (w_re, w_im) = (
            (e_re * t_re + e_im * t_im) / n,
            (e_im * t_re - e_re * t_im) / n,
        );
        assert!(
            (w_re - f[2]).abs() < 1e-8 && (w_im - f[3]).abs() < 1e-8,
            "{line}"
        );
    }
}

#[test]
fn mahler_probe_is_deterministic() {
    let args = [
        "mahler",
        "--c",
        "0.3",
        "--probe",
        "angle=0,rmax=0.99999",
        "--points",
        "40",
    ];
    let a = diffeq(&args);
    let b = diffeq(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("angle,track,r,abs_y,d_abs_y\n"));
    assert!(String::from_utf8_lossy(&a.stderr).contains("case 2"));
}

#[test]
fn mahler_parameters() {
    let v = json_out(&["mahler", "--lambda", "0.5", "--order", "50"]);
    assert_eq!(v["c"][0], 0.1875);
    assert_eq!(v["case"], "case1");
    assert!(v["laurentResidual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# model\nlambda = 0.25\norder = 20\nseed = 7\n").unwrap();
    let cfg = cfg.display().to_string();
    let v = json_out(&["series", "--config", &cfg, "--order", "30"]);
    let echo = &v["metadata"]["config"];
    assert_eq!(echo["lambda"], serde_json::json!([0.25, 0.0]));
    assert_eq!(echo["order"], 30);
    assert_eq!(v["metadata"]["seed"], 7);
    assert_eq!(v["series"]["coeffs"].as_array().unwrap().len(), 31);
}

#[test]
fn precision_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_diffeq"))
        .args(["series", "--lambda", "0.5", "--order", "5"])
        .env("DIFFEQ_PRECISION", "53")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["config"]["precision"], 53);
    // The default tolerance is the 2^(−bits/2) floor at this precision.
    assert_eq!(v["metadata"]["config"]["tol"], 2f64.powf(-26.5));
    let o = Command::new(env!("CARGO_BIN_EXE_diffeq"))
        .args(["strips"])
        .env("DIFFEQ_PRECISION", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

fn sample(n: usize) -> GridSample {
    let points = (0..n).map(|i| [i as f64, -(i as f64)]).collect();
    let values = (0..n).map(|i| [0.5 * i as f64, 1.0]).collect();
    let residuals = (0..n).map(|i| (i % 2 == 0).then_some(1e-12)).collect();
    GridSample::new(
        PlaneTag::ZPlane,
        points,
        values,
        residuals,
        Metadata::new("test", serde_json::json!({})),
    )
    .unwrap()
}

#[test]
fn exported_grids() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.csv");
    export_grid(&sample(0), ExportFormat::Csv, &p).unwrap();
    assert_eq!(read(&p), "re_point,im_point,re_value,im_value,residual\n");
    export_grid(&sample(1), ExportFormat::Csv, &p).unwrap();
    assert_eq!(read(&p).lines().count(), 2);
    let j = dir.path().join("g.json");
    let s = sample(5);
    export_grid(&s, ExportFormat::Json, &j).unwrap();
    assert_eq!(GridSample::from_json(&read(&j)).unwrap(), s.sorted());
}

#[test]
fn grid_skips_points_on_the_cut() {
    let v = json_out(&[
        "grid", "--lambda", "0.5", "--format", "json", "--step", "0.05",
    ]);
    let n = v["points"].as_array().unwrap().len();
    assert_eq!(
        n + v["metadata"]["config"]["skipped"].as_u64().unwrap() as usize,
        25
    );
    assert!(v["points"]
        .as_array()
        .unwrap()
        .iter()
        .any(|p| p[0] == 0.0 && p[1] == 0.0));
}
