use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tomo2d::grid_field::mean_integral;
use tomo2d::io::{read_grid_field, read_sinogram_csv};
use tomo2d::raytransforms::Channel;

fn tomo2d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tomo2d")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn gen(out: &Path, extra: &[&str]) {
    let mut args = vec!["gen", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = tomo2d(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn gen_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    gen(&a, &["--kind", "hessian", "--seed", "7"]);
    gen(&b, &["--kind", "hessian", "--seed", "7"]);
    for name in ["meta.json", "f11.csv", "f12.csv", "f22.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let c = tmp.path().join("c");
    gen(&c, &["--kind", "hessian", "--seed", "8"]);
    assert_ne!(fs::read(a.join("f11.csv")).unwrap(), fs::read(c.join("f11.csv")).unwrap());
}

#[test]
fn gen_rejects_undecayed_gaussian() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tomo2d(&["gen", "--kind", "gaussian-sym2", "--extent", "2", "--width", "1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("boundary ring"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&tomo2d(&["gen", "--kind", "nonsense"])), 2);
    assert_eq!(code(&tomo2d(&["verify", "--suite", "nonsense", "--out", "/nonexistent/x"])), 2);
    assert_eq!(code(&tomo2d(&["gen", "--kind", "zero", "--grid", "24"])), 2);
}

#[test]
fn gen_mean_zero_random_field() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), &["--kind", "random-bandlimited", "--mean-zero", "--grid", "64", "--field", "elastic2"]);
    let f = read_grid_field(tmp.path()).unwrap();
    assert!(mean_integral(&f).iter().all(|m| m.abs() <= 1e-13));
}

#[test]
fn decompose_hessian_is_potential() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let out = tmp.path().join("out");
    gen(&input, &["--kind", "hessian", "--seed", "3"]);
    let o = tomo2d(&["decompose", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["schema"], "report/1");
    assert_eq!(r["pass"], true);
    assert!(r["solenoidal_fraction"].as_f64().unwrap() <= 1e-8);
    assert!(out.join("g/f11.csv").exists() && out.join("v/v.csv").exists());
}

#[test]
fn decompose_random_mean_zero_residual() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let out = tmp.path().join("out");
    gen(&input, &["--kind", "random-bandlimited", "--mean-zero", "--seed", "5"]);
    let o = tomo2d(&["decompose", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(report(&out)["residuals"]["reconstruction"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn decompose_elastic_writes_three_parts() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let out = tmp.path().join("out");
    gen(&input, &["--kind", "elastic-potential", "--seed", "2"]);
    let o = tomo2d(&["decompose", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("u/u1.csv").exists() && out.join("v/f12.csv").exists() && out.join("g/w1212.csv").exists());
    assert!(report(&out)["solenoidal_fraction"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn decompose_rejects_nonzero_mean() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let out = tmp.path().join("out");
    gen(&input, &["--kind", "gaussian-sym2", "--weights", "1,0,0"]);
    let o = tomo2d(&["decompose", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let r = report(&out);
    assert_eq!(r["pass"], false);
    let f11 = &r["means"][0];
    assert_eq!(f11[0], "f11");
    assert!((f11[1].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn decompose_flags_residuals_above_tol() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let out = tmp.path().join("out");
    gen(&input, &["--kind", "random-bandlimited", "--mean-zero", "--grid", "32"]);
    let o = tomo2d(&["decompose", input.to_str().unwrap(), "--out", out.to_str().unwrap(), "--tol", "0"]);
    assert_eq!(code(&o), 1);
    assert_eq!(report(&out)["pass"], false);
}

#[test]
fn transform_i0_of_gaussian() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    gen(&input, &["--kind", "gaussian-sym2", "--weights", "1,0,0"]);
    let o = tomo2d(&["transform", input.to_str().unwrap(), "--transform", "i0,i1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_sinogram_csv(&tmp.path().join("sinogram.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 64 * 129);
    let centre = rows.iter().find(|r| r.channel == Channel::I0 && r.phi == 0.0 && r.s == 0.0).unwrap();
    assert!((centre.value - std::f64::consts::PI.sqrt()).abs() < 1e-6);
}

#[test]
fn transform_x2_of_elastic_potential_vanishes() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    gen(&input, &["--kind", "elastic-potential", "--seed", "4"]);
    let o = tomo2d(&["transform", input.to_str().unwrap(), "--transform", "x2", "--angles", "16", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_sinogram_csv(&tmp.path().join("sinogram.csv")).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.value.abs() <= 1e-6), "{:?}", rows.iter().map(|r| r.value.abs()).fold(0.0, f64::max));
}

#[test]
fn transform_of_zero_field_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    gen(&input, &["--kind", "zero", "--grid", "32"]);
    let o = tomo2d(&["transform", input.to_str().unwrap(), "--transform", "i0,i2,mixed", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rows = read_sinogram_csv(&tmp.path().join("sinogram.csv")).unwrap();
    assert!(rows.iter().all(|r| r.value == 0.0));
}

#[test]
fn verify_saint_venant_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tomo2d(&["verify", "--suite", "saint-venant", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("report-saint-venant.json")).unwrap()).unwrap();
    assert_eq!(r["schema"], "report/1");
    assert_eq!(r["suite"], "saint-venant");
    assert_eq!(r["pass"], true);
    assert!(r["notes"][0].as_str().unwrap().contains("annihilated"));
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"literal.field") && names.contains(&"compatibility.hessian"));
}
