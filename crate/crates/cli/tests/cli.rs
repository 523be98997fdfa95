use std::process::{Command, Output};

use serde_json::Value;

fn relmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relmetric")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = relmetric(args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn metric_check_reports_verdict_and_passes() {
    let v = json(&["metric-check", "--p", "1", "--q", "0.5", "--samples", "2000"]);
    assert_eq!(v["metric"], Value::Bool(true));
    assert_eq!(v["fuzz"]["passes"], Value::Bool(true));
    assert_eq!(v["line_fuzz"]["passes"], Value::Bool(true));
}

#[test]
fn fuzz_outside_the_metric_region_exits_2_with_witness() {
    let out = relmetric(&["fuzz", "--p", "0.3", "--q", "0.5", "--samples", "20000"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["violation"], Value::Bool(true));
    assert_eq!(v["report"]["witness"].as_array().map(|w| w.len()), Some(3));
}

#[test]
fn invalid_input_exits_1() {
    for args in [
        &["fuzz", "--p", "-1", "--q", "0.5"][..],
        &["fuzz", "--weight", "x+"],
        &["geodesic", "--alpha", "0.5", "--x", "1,0"],
        &["ball", "--p", "1", "--q", "1"],
        &["metric-check", "--p", "abc", "--q", "1"],
        &["--no-such-flag"],
        &["quasiconvexity", "--p", "1", "--q", "0.5", "--format", "svg"],
    ] {
        let out = relmetric(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn quasiconvexity_square_root_weight() {
    let v = json(&["quasiconvexity", "--p", "1", "--q", "0.5"]);
    let row = &v["rows"][0];
    let c = f(&row["estimate"]);
    assert!((c - 2f64.sqrt()).abs() < 1e-6, "{c}");
    assert!(f(&row["lower"]) <= c + 1e-9 && c <= f(&row["upper"]));
}

#[test]
fn quasiconvexity_grid_has_one_row_per_pair() {
    let out = relmetric(&["quasiconvexity", "--p", "1,2", "--q", "0.25,0.5,1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 6);
    assert!(text.lines().any(|l| l.contains(",inf,")), "q = 1 rows diverge");
}

#[test]
fn geodesic_length_matches_closed_form() {
    let v = json(&["geodesic", "--alpha", "0.5", "--x", "2,0", "--y", "0,1", "--samples", "4000"]);
    assert!((f(&v["closed_form"]) - 2.0).abs() < 1e-12);
    assert!(f(&v["difference"]).abs() <= 1e-6);
    let cum = v["cumulative_length"].as_array().unwrap();
    assert_eq!(cum.len(), 4000);
    assert!((f(cum.last().unwrap()) - f(&v["integrated"])).abs() < 1e-9);
}

#[test]
fn ball_with_corners_is_unbounded_and_measured() {
    let v = json(&["ball", "--p", "inf", "--q", "1", "--x", "1,0", "--radius", "1"]);
    assert_eq!(v["bounded"], Value::Bool(false));
    let corners = v["corners"].as_array().unwrap();
    assert_eq!(corners.len(), 2);
    for c in corners {
        assert!((f(&c["theta"]).abs() - std::f64::consts::FRAC_PI_3).abs() < 1e-6);
        assert!((f(&c["jump"]) - 3f64.sqrt()).abs() < 1e-5);
    }
    assert!(v["s_values"].as_array().unwrap().iter().any(|s| s == "inf"));
}

#[test]
fn smooth_ball_is_convex() {
    let v = json(&["ball", "--p", "2", "--q", "0.5", "--radius", "0.3", "--samples", "256"]);
    assert_eq!(v["bounded"], Value::Bool(true));
    assert_eq!(v["convexity"]["convex"], Value::Bool(true));
    assert_eq!(v["isotropy"]["isotropic"], Value::Bool(true));
}

#[test]
fn hyperbolic_pair_in_ball_domain_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ball.json");
    std::fs::write(&path, r#"{"type": "ball", "center": [1, 0], "radius": 2}"#).unwrap();
    let v = json(&["hyperbolic", "--domain", path.to_str().unwrap(), "--x", "1.2,0.4", "--y", "0.1,-0.5"]);
    let (rg, r) = (f(&v["rho_g"]), f(&v["reference"]));
    assert!((rg - r).abs() < 1e-4 * r.max(1.0), "{rg} vs {r}");
    assert!(f(&v["seittenranta"]) <= rg + 1e-12);
}

#[test]
fn hyperbolic_punctured_default_is_exact() {
    let v = json(&["hyperbolic", "--x", "0.1,0.2", "--y", "-0.3,0.1"]);
    assert!((f(&v["rho_g"]) - f(&v["reference"])).abs() < 1e-12);
}

#[test]
fn hyperbolic_rejects_points_outside_domain() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    std::fs::write(&path, r#"{"type": "half_space", "dimension": 2}"#).unwrap();
    let out = relmetric(&["hyperbolic", "--domain", path.to_str().unwrap(), "--x", "0,1", "--y", "0,-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn hyperbolic_suites_pass() {
    let v = json(&["hyperbolic", "--samples", "5"]);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 9);
    assert!(checks.iter().all(|c| c["pass"] == Value::Bool(true)));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let args = ["fuzz", "--p", "0.5", "--q", "0.9", "--samples", "5000", "--seed", "7", "--format", "csv"];
    let a = relmetric(&args);
    let b = relmetric(&args);
    assert_eq!(a.stdout, b.stdout);
    let other = relmetric(&["fuzz", "--p", "0.5", "--q", "0.9", "--samples", "5000", "--seed", "8", "--format", "csv"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn out_flag_and_all_formats() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["ball", "--p", "1", "--q", "0.5", "--radius", "0.5", "--samples", "128"];
    for (fmt, check) in [
        ("csv", (|s: &str| s.starts_with("index,theta,s,point") && s.lines().count() == 129) as fn(&str) -> bool),
        ("json", |s: &str| serde_json::from_str::<Value>(s).is_ok()),
        ("svg", |s: &str| s.starts_with("<svg") && s.contains("<polyline") && s.trim_end().ends_with("</svg>")),
    ] {
        let path = dir.path().join(format!("ball.{fmt}"));
        let mut args = base.to_vec();
        args.extend(["--format", fmt, "--out", path.to_str().unwrap()]);
        let out = relmetric(&args);
        assert_eq!(out.status.code(), Some(0), "{fmt}");
        assert!(out.stdout.is_empty());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(check(&text), "{fmt}: {}", &text[..text.len().min(200)]);
    }
}

#[test]
fn custom_weight_expression() {
    let v = json(&["metric-check", "--weight", "max(x, y)", "--alpha", "1", "--samples", "1000"]);
    assert_eq!(v["metric"], Value::Null);
    assert_eq!(v["fuzz"]["passes"], Value::Bool(true));
}
