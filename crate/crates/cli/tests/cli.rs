use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphere-dubins"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

const START: &str = r#"{"lat_deg": 10, "lon_deg": 20, "heading_deg": 30}"#;

#[test]
fn plan_to_the_start_is_a_zero_length_great_circle() {
    let dir = tempfile::tempdir().unwrap();
    let req = format!(r#"{{"start": {START}, "goal": {START}, "u_max": 1.7320508075688772}}"#);
    let input = write(dir.path(), "req.json", &req);
    let out = run(&["plan", "--input", &input]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["word"], "G");
    assert!(v["total_length"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["alternatives"].is_array());
}

#[test]
fn out_of_domain_radius_needs_override() {
    let dir = tempfile::tempdir().unwrap();
    // u_max = sqrt(1/r^2 - 1) with r = 0.6
    let u = (1.0f64 / 0.36 - 1.0).sqrt();
    let req = format!(r#"{{"start": {START}, "goal": {{"lat_deg": 15, "lon_deg": 25, "heading_deg": 60}}, "u_max": {u}}}"#);
    let input = write(dir.path(), "req.json", &req);
    assert_eq!(run(&["plan", "--input", &input]).status.code(), Some(4));
    let out = run(&["plan", "--input", &input, "--allow-out-of-domain"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn malformed_input_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(run(&["plan", "--input", &input]).status.code(), Some(2));
    let neither = format!(r#"{{"start": {START}, "goal": {START}}}"#);
    let input = write(dir.path(), "neither.json", &neither);
    assert_eq!(run(&["plan", "--input", &input]).status.code(), Some(2));
    assert_eq!(run(&["plan", "--input", "/nonexistent/req.json"]).status.code(), Some(2));
}

#[test]
fn plan_trace_is_written_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let req = format!(
        r#"{{"start": {START}, "goal": {{"lat_deg": -5, "lon_deg": 60, "heading_deg": -120}}, "eta": 0.5773502691896258}}"#
    );
    let input = write(dir.path(), "req.json", &req);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = run(&["plan", "--input", &input, "--out", d.to_str().unwrap(), "--trace", "--step", "0.05"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["plan.json", "plan_frame.csv", "plan_chart.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let frame = fs::read_to_string(a.join("plan_frame.csv")).unwrap();
    assert!(frame.starts_with("s,X1,X2,X3,T1,T2,T3,N1,N2,N3,u\n"));
    let chart = fs::read_to_string(a.join("plan_chart.csv")).unwrap();
    assert!(chart.starts_with("s,lat_deg,lon_deg,heading_deg,u\n"));
    let first = &rows(&chart)[0];
    assert!((first[1] - 10.0).abs() < 1e-9 && (first[2] - 20.0).abs() < 1e-9 && (first[3] - 30.0).abs() < 1e-9);
    let plan: Value = serde_json::from_str(&fs::read_to_string(a.join("plan.json")).unwrap()).unwrap();
    let total = plan["total_length"].as_f64().unwrap();
    let last = rows(&frame).last().unwrap()[0];
    assert!((last - total).abs() < 1e-12);
}

#[test]
fn integrate_spherical_equator_matches_analytic_longitude() {
    let dir = tempfile::tempdir().unwrap();
    let req = r#"{"config": {"lat_deg": 0, "lon_deg": 0, "heading_deg": 90, "eta": 1},
                  "control": [{"u": 0, "length": 3}], "s_end": 3}"#;
    let input = write(dir.path(), "req.json", req);
    let out = run(&["integrate", "--model", "spherical", "--input", &input, "--step", "0.01"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let data = rows(&text);
    assert_eq!(data.len(), 301);
    for r in &data {
        assert!(r[1].abs() < 1e-9);
        assert!((r[2].to_radians() - r[0]).abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn integrate_sabban_great_circle_is_planar() {
    let dir = tempfile::tempdir().unwrap();
    let req = r#"{"config": {"lat_deg": 30, "lon_deg": 45, "heading_deg": 10, "eta": 1},
                  "control": [{"u": 0, "length": 6.283185307179586}], "s_end": 6.283185307179586}"#;
    let input = write(dir.path(), "req.json", req);
    let out_dir = dir.path().join("out");
    let out = run(&["integrate", "--model", "sabban", "--input", &input, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let data = rows(&fs::read_to_string(out_dir.join("trace_sabban.csv")).unwrap());
    // plane through X(0) and X(pi/2)
    let x0 = [data[0][1], data[0][2], data[0][3]];
    let q = &data[data.len() / 4];
    let x1 = [q[1], q[2], q[3]];
    let mut n = [
        x0[1] * x1[2] - x0[2] * x1[1],
        x0[2] * x1[0] - x0[0] * x1[2],
        x0[0] * x1[1] - x0[1] * x1[0],
    ];
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    n.iter_mut().for_each(|v| *v /= len);
    for r in &data {
        assert!((r[1] * n[0] + r[2] * n[1] + r[3] * n[2]).abs() < 1e-9);
    }
}

#[test]
fn integrate_zero_length_is_one_row_and_bytes_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let req = r#"{"config": {"lat_deg": 5, "lon_deg": 5, "heading_deg": 5, "eta": 1},
                  "control": [{"u": 1, "length": 1}], "s_end": 0}"#;
    let input = write(dir.path(), "req.json", req);
    let a = run(&["integrate", "--model", "spherical", "--input", &input]);
    let b = run(&["integrate", "--model", "spherical", "--input", &input]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 2);
    let too_fast = r#"{"config": {"lat_deg": 5, "lon_deg": 5, "heading_deg": 5, "eta": 1},
                       "control": [{"u": 2, "length": 1}], "s_end": 1}"#;
    let input = write(dir.path(), "fast.json", too_fast);
    assert_eq!(run(&["integrate", "--model", "spherical", "--input", &input]).status.code(), Some(2));
}

#[test]
fn verify_geometry_passes_and_zero_tolerance_fails() {
    let out = run(&["verify", "--suite", "geometry"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["failed"], 0);
    let out = run(&["verify", "--suite", "geometry", "--tolerance", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], 0);
    assert_eq!(run(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
}

#[test]
fn verify_equivalence_reports_deviation_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let a = run(&["verify", "--suite", "equivalence", "--seed", "7", "--out", d]);
    let b = run(&["verify", "--suite", "equivalence", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(fs::read(dir.path().join("report_equivalence.json")).unwrap(), a.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["metrics"]["max_config_deviation"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["seed"], 7);
}
