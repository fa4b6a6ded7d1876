use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use helicoidal::curve::{BaseCurve, Jet, C64};
use helicoidal::io::{read_curve, read_path, write_curve};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_helicoidal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_curve_file(path: &Path, c: &BaseCurve, n: usize) {
    let mut buf = Vec::new();
    write_curve(&mut buf, c, n).unwrap();
    fs::write(path, buf).unwrap();
}

fn summary_value(text: &str, key: &str) -> f64 {
    let token = text
        .split_whitespace()
        .find_map(|t| t.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"));
    token.parse().unwrap()
}

#[test]
fn solve_helicoid_prints_a_line() {
    let o = run(&["solve", "--space", "r3", "--H", "0", "--M", "0", "--m", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let curve = read_curve(stdout(&o).as_bytes()).unwrap();
    for u in curve.grid(11) {
        let j = curve.eval(u).unwrap();
        assert!(j.pos.im.abs() < 1e-15 && (j.pos.re - u).abs() < 1e-12);
    }
}

#[test]
#[allow(clippy::approx_constant)] // mirrors the rounded --start value
fn solve_torus_value_gives_the_torus_radius() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("torus.csv");
    // flux of the Clifford torus: 2 pi a sqrt(1 - a^2) with a = 1/sqrt 2
    let c = format!("{}", std::f64::consts::PI);
    let o = run(&["solve", "--space", "s3", "--H", "0", "--C", &c, "--m", "1", "--start", "0.7071", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let curve = read_curve(fs::read(&out).unwrap().as_slice()).unwrap();
    for u in curve.grid(50) {
        assert!((curve.eval(u).unwrap().pos.norm() - 0.7071).abs() < 1e-4);
    }
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta["spaceform"], "s3");
    assert_eq!(meta["m"], 1.0);
}

#[test]
fn missing_pitch_is_a_usage_error() {
    let o = run(&["solve", "--space", "r3", "--H", "0", "--M", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("InvalidInput"));
}

#[test]
fn both_c_and_m_is_a_usage_error() {
    let o = run(&["solve", "--H", "0", "--M", "0", "--C", "0", "--m", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_level_set_is_a_numeric_failure() {
    let o = run(&["solve", "--H", "1", "--M", "-50", "--m", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("EmptyLevelSet"));
}

#[test]
fn check_cylinder_passes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("cyl.csv");
    let report = dir.path().join("report.csv");
    write_curve_file(&input, &BaseCurve::circle(1.0, C64::new(0.0, 0.0)), 401);
    let o = run(&["check", "--input", p(&input), "--H", "1", "--m", "1", "--samples", "40", "--report", p(&report)]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(summary_value(&stdout(&o), "max_dev") <= 1e-9);
    assert!(stdout(&o).contains("verdict=CMC"));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("u,omega,closed_form,abs_diff"));
    assert!(text.lines().last().unwrap().starts_with("# median_C="));
}

#[test]
fn check_perturbed_cylinder_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("wobbly.csv");
    let c = BaseCurve::from_fn((0.0, std::f64::consts::TAU), |u| {
        let (r, dr, ddr) = (1.0 + 0.1 * u.sin(), 0.1 * u.cos(), -0.1 * u.sin());
        let e = C64::from_polar(1.0, u);
        let i = C64::i();
        Jet { pos: e * r, vel: e * (dr + i * r), acc: e * (ddr - r + i * 2.0 * dr) }
    })
    .unwrap();
    write_curve_file(&input, &c, 401);
    let o = run(&["check", "--input", p(&input), "--H", "1", "--m", "1", "--samples", "30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NON_CMC"));
}

#[test]
fn check_empty_csv_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.csv");
    fs::write(&input, "").unwrap();
    let o = run(&["check", "--input", p(&input), "--H", "1", "--m", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_then_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let r3 = dir.path().join("r3.csv");
    let o = run(&["solve", "--H", "-0.5", "--M", "1", "--m", "1", "--out", p(&r3)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&["check", "--input", p(&r3), "--H", "-0.5", "--m", "1", "--samples", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let h3 = dir.path().join("h3.csv");
    let o = run(&["solve", "--space", "h3", "--H", "0.8", "--C", "2.0", "--m", "1.2", "--start", "0.9", "--length", "3", "--out", p(&h3)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&["check", "--space", "h3", "--input", p(&h3), "--H", "0.8", "--m", "1.2", "--samples", "30"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("c.csv");
    fs::write(&cfg, format!("# r3 run\nH = -0.5\nM = 1\nm = 1\nout = {}\n", p(&out))).unwrap();
    let o = run(&["solve", "--config", p(&cfg), "--M", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta["M"], 0.5);
    assert_eq!(meta["H"], -0.5);
}

#[test]
fn cylinder_mesh_vertex_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cyl.obj");
    let o = run(&["mesh", "--radius", "1", "--m", "1", "--nu", "64", "--nv", "64", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 4096);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2 * 63 * 63);
}

#[test]
fn torus_mesh_raw_vertices_lie_on_the_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("torus.obj");
    let o = run(&["mesh", "--space", "s3", "--xi", "0.7853981633974483", "--m", "1", "--nu", "24", "--nv", "24", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let raw = fs::read_to_string(out.with_extension("csv")).unwrap();
    let mut n = 0;
    for line in raw.lines().skip(1) {
        let x: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(x.len(), 4);
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        assert!((norm2 - 1.0).abs() <= 1e-12);
        n += 1;
    }
    assert_eq!(n, 24 * 24);
}

#[test]
fn degenerate_mesh_range_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad.obj");
    let o = run(&["mesh", "--radius", "1", "--m", "1", "--u-range", "1,1", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn treadmill_of_a_circle_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("path.csv");
    let back = dir.path().join("back.csv");
    let o = run(&["treadmill", "--radius", "2", "--samples", "200", "--out", p(&path)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let sled = read_path(fs::read(&path).unwrap().as_slice(), 1.0).unwrap();
    for i in 0..sled.len() {
        assert!((sled.point(i) - C64::new(0.0, -2.0)).norm() < 1e-12);
    }
    let o = run(&["treadmill", "--reconstruct", "--input", p(&path), "--out", p(&back)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let curve = read_curve(fs::read(&back).unwrap().as_slice()).unwrap();
    for u in curve.grid(30) {
        assert!((curve.eval(u).unwrap().pos.norm() - 2.0).abs() < 1e-9);
    }
}

#[test]
fn treadmill_ell_outside_unit_interval_warns() {
    let o = run(&["treadmill", "--radius", "1", "--ell", "1.5", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn flux_and_equiv_tables() {
    let o = run(&["flux", "--radius", "1", "--m", "1", "--H", "1", "--samples", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("u,conormal,shaving,omega,closed_form"));
    for line in text.lines().skip(1) {
        let x: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        // shaving flux of the unit cylinder is -pi, omega = -C
        assert!((x[2] + std::f64::consts::PI).abs() < 1e-9);
        assert!((x[3] + x[4]).abs() < 1e-9);
    }
    let o = run(&["equiv", "--radius", "1.5", "--m", "1", "--H", "0.7", "--samples", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 21);
    let o = run(&["equiv", "--space", "s3", "--radius", "0.5", "--m", "1", "--H", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
