//! The six experiments behind the subcommands.

use relmetric::ball::{
    convexity_check, detect_corners, isotropy_check, measure_corner, star_shaped_check, trace_sphere, BallTrace,
};
use relmetric::fuzz::{triangle_fuzz, FuzzReport};
use relmetric::hyperbolic::{
    hyperbolic_ball, hyperbolic_half_space, mobius_invariance_test, rho_g, rho_g_properties_test, rho_g_punctured,
    rho_prime_with, seittenranta, DomainSpec, ExtendedPoint, MOBIUS_DRIFT_TOL, MOBIUS_TOL, SAMPLED_BOUNDARY_TOL,
};
use relmetric::means::power_mean;
use relmetric::quasiconvexity::{c_m_estimate, c_m_homogeneous, c_pq_bounds, SearchConfig};
use relmetric::quasihyperbolic::{geodesic, k_alpha, path_length_default, Path};
use relmetric::relative_metric::{
    metric_criterion_quasimean, metric_fuzz, metric_on_line_fuzz, pq_is_metric, rho_m, MetricDescriptor, MetricKind,
    FUZZ_MAGNITUDES,
};
use relmetric::vector::{dot, norm, random_point, scale, sub};
use relmetric::{SampleGrid, WeightFunction};
use serde_json::{json, Value};

use crate::output::{cell, num, nums, point_cell, Artifact, Plot};
use crate::{Command, RunConfig};

type Res<T> = Result<T, String>;

/// Relative triangle-violation tolerance for every campaign.
pub const FUZZ_TOL: f64 = 1e-12;

pub fn run(cfg: &RunConfig) -> Res<Artifact> {
    match cfg.command {
        Command::MetricCheck => metric_check(cfg),
        Command::Quasiconvexity => quasiconvexity(cfg),
        Command::Geodesic => geodesic_cmd(cfg),
        Command::Ball => ball(cfg),
        Command::Hyperbolic => hyperbolic(cfg),
        Command::Fuzz => fuzz(cfg),
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn parse_list(name: &str, s: &str) -> Res<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("--{name}: cannot parse {t:?} as a number")))
        .collect()
}

fn single(name: &str, s: &Option<String>) -> Res<Option<f64>> {
    match s {
        None => Ok(None),
        Some(s) => match parse_list(name, s)?.as_slice() {
            [v] => Ok(Some(*v)),
            _ => Err(format!("--{name} takes a single value here")),
        },
    }
}

fn point(name: &str, s: &Option<String>) -> Res<Option<Vec<f64>>> {
    s.as_deref().map(|s| parse_list(name, s)).transpose()
}

fn require<T>(v: Option<T>, name: &str) -> Res<T> {
    v.ok_or_else(|| format!("--{name} is required"))
}

fn samples(cfg: &RunConfig, default: usize) -> Res<usize> {
    match cfg.samples.unwrap_or(default) {
        0 => Err("--samples must be positive".into()),
        n => Ok(n),
    }
}

/// Weight from `--weight`, or `(x^p + y^p)^{q/p}` from `--p`/`--q`.
struct WeightChoice {
    weight: WeightFunction,
    pq: Option<(f64, f64)>,
}

fn weight_choice(cfg: &RunConfig) -> Res<WeightChoice> {
    if let Some(src) = &cfg.weight {
        if cfg.p.is_some() || cfg.q.is_some() {
            return Err("give either --weight or --p/--q, not both".into());
        }
        return Ok(WeightChoice { weight: WeightFunction::from_expression(src).map_err(err)?, pq: None });
    }
    let p = require(single("p", &cfg.p)?, "p (or --weight)")?;
    let q = require(single("q", &cfg.q)?, "q (or --weight)")?;
    if !(p > 0.0) || !(q >= 0.0) {
        return Err(format!("need p > 0 and q >= 0, got ({p}, {q})"));
    }
    Ok(WeightChoice { weight: WeightFunction::pq(p, q), pq: Some((p, q)) })
}

fn descriptor(choice: &WeightChoice, dim: usize) -> Res<MetricDescriptor> {
    let kind = match choice.pq {
        Some((p, q)) => MetricKind::PqRelative { p, q },
        None => MetricKind::CustomWeight(choice.weight.clone()),
    };
    MetricDescriptor::new(kind, dim).map_err(err)
}

fn fuzz_json(r: &FuzzReport) -> Value {
    json!({
        "samples": r.samples,
        "seed": r.seed,
        "worst_violation": num(r.worst_violation),
        "worst_relative": num(r.worst_relative),
        "passes": r.passes(FUZZ_TOL),
        "witness": r.witness.as_ref().map(|w| w.iter().map(|p| nums(p)).collect::<Vec<_>>()),
    })
}

fn witness_cell(r: &FuzzReport) -> String {
    r.witness
        .as_ref()
        .map(|w| w.iter().map(|p| point_cell(p)).collect::<Vec<_>>().join("|"))
        .unwrap_or_default()
}

const FUZZ_HEADER: [&str; 7] = ["samples", "seed", "worst_violation", "worst_relative", "passes", "witness", "weight"];

fn fuzz_cells(r: &FuzzReport, label: &str) -> Vec<String> {
    vec![
        r.samples.to_string(),
        r.seed.to_string(),
        cell(r.worst_violation),
        cell(r.worst_relative),
        r.passes(FUZZ_TOL).to_string(),
        witness_cell(r),
        label.to_string(),
    ]
}

fn metric_check(cfg: &RunConfig) -> Res<Artifact> {
    let n = samples(cfg, 10_000)?;
    let dim = cfg.dim.unwrap_or(3);
    let choice = weight_choice(cfg)?;
    let desc = descriptor(&choice, dim)?;
    let space = metric_fuzz(&desc, n, cfg.seed).map_err(err)?;
    let line = metric_on_line_fuzz(desc.weight(), n, cfg.seed).map_err(err)?;
    let theory = choice.pq.map(|(p, q)| pq_is_metric(p, q));
    let criterion = match cfg.alpha {
        Some(alpha) => {
            let grid = SampleGrid::log_spaced(1.0, 1e6, 512).map_err(err)?;
            let o = metric_criterion_quasimean(desc.weight(), alpha, &grid).map_err(err)?;
            serde_json::to_value(o).map_err(err)?
        }
        None => Value::Null,
    };
    let violation = !space.passes(FUZZ_TOL) || !line.passes(FUZZ_TOL);
    let label = choice.weight.label().to_string();
    let (p, q) = choice.pq.unzip();
    let json = json!({
        "subcommand": "metric-check",
        "weight": label,
        "p": p.map(num),
        "q": q.map(num),
        "dimension": dim,
        "metric": theory,
        "criterion": criterion,
        "fuzz": fuzz_json(&space),
        "line_fuzz": fuzz_json(&line),
        "violation": violation,
    });
    let mut header = vec!["campaign".to_string(), "metric".to_string()];
    header.extend(FUZZ_HEADER.iter().map(|s| s.to_string()));
    let theory_cell = theory.map(|b| b.to_string()).unwrap_or_default();
    let rows = [("space", &space), ("line", &line)]
        .iter()
        .map(|(name, r)| {
            let mut row = vec![name.to_string(), theory_cell.clone()];
            row.extend(fuzz_cells(r, &label));
            row
        })
        .collect();
    Ok(Artifact { json, header, rows, plot: None, violation })
}

fn quasiconvexity(cfg: &RunConfig) -> Res<Artifact> {
    let search = SearchConfig::default();
    let header: Vec<String> = ["weight", "p", "q", "alpha", "lower", "estimate", "upper", "converged", "argmax_r"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    if let Some(src) = &cfg.weight {
        let alpha = require(cfg.alpha, "alpha")?;
        let w = WeightFunction::from_expression(src).map_err(err)?;
        let e = c_m_estimate(&w, alpha, &search).map_err(err)?;
        rows.push(vec![
            w.label().to_string(),
            String::new(),
            String::new(),
            cell(alpha),
            cell(e.lower_bound),
            cell(e.c_estimate),
            cell(e.upper_bound),
            e.converged.to_string(),
            cell(e.argmax_r),
        ]);
        entries.push(json!({
            "weight": w.label(), "alpha": num(alpha),
            "lower": num(e.lower_bound), "estimate": num(e.c_estimate), "upper": num(e.upper_bound),
            "converged": e.converged, "argmax_r": num(e.argmax_r),
        }));
    } else {
        let ps = parse_list("p", &require(cfg.p.clone(), "p (or --weight)")?)?;
        let qs = parse_list("q", &require(cfg.q.clone(), "q (or --weight)")?)?;
        for &p in &ps {
            for &q in &qs {
                if !(p > 0.0) || !(0.0..=1.0).contains(&q) {
                    return Err(format!("need p > 0 and 0 <= q <= 1, got ({p}, {q})"));
                }
                let w = WeightFunction::power_mean_pow(p, q);
                let e = c_m_homogeneous(&w, q, &search).map_err(err)?;
                let (lo, hi) = if q < 1.0 { c_pq_bounds(p, q) } else { (f64::INFINITY, f64::INFINITY) };
                let label = WeightFunction::pq(p, q).label().to_string();
                rows.push(vec![
                    label.clone(),
                    cell(p),
                    cell(q),
                    cell(q),
                    cell(lo),
                    cell(e.c_estimate),
                    cell(hi),
                    e.converged.to_string(),
                    cell(e.argmax_r),
                ]);
                entries.push(json!({
                    "weight": label, "p": num(p), "q": num(q), "alpha": num(q),
                    "lower": num(lo), "estimate": num(e.c_estimate), "upper": num(hi),
                    "converged": e.converged, "argmax_r": num(e.argmax_r),
                }));
            }
        }
    }
    Ok(Artifact {
        json: json!({ "subcommand": "quasiconvexity", "rows": entries }),
        header,
        rows,
        plot: None,
        violation: false,
    })
}

fn geodesic_cmd(cfg: &RunConfig) -> Res<Artifact> {
    let alpha = require(cfg.alpha, "alpha")?;
    let x = require(point("x", &cfg.x)?, "x")?;
    let y = require(point("y", &cfg.y)?, "y")?;
    if x.len() != y.len() {
        return Err("--x and --y must have the same dimension".into());
    }
    let n = samples(cfg, 10_000)?.max(2);
    let k = k_alpha(alpha, &x, &y).map_err(err)?;
    let g = geodesic(alpha, &x, &y).map_err(err)?;
    let pts = g.sample(n);
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    cumulative.push(0.0);
    for w in pts.windows(2) {
        acc += path_length_default(alpha, &Path::Polyline(w)).map_err(err)?;
        cumulative.push(acc);
    }
    let integrated = path_length_default(alpha, &Path::Polyline(&pts)).map_err(err)?;
    let difference = integrated - k;
    let json = json!({
        "subcommand": "geodesic",
        "alpha": num(alpha),
        "x": nums(&x),
        "y": nums(&y),
        "closed_form": num(k),
        "integrated": num(integrated),
        "difference": num(difference),
        "samples": n,
        "polar": { "c1": num(g.c1), "c2": num(g.c2), "beta": num(g.beta), "radial": g.radial },
        "points": pts.iter().map(|p| nums(p)).collect::<Vec<_>>(),
        "cumulative_length": nums(&cumulative),
    });
    let header = ["index", "point", "cumulative_length", "closed_form", "integrated"].iter().map(|s| s.to_string()).collect();
    let rows = pts
        .iter()
        .zip(&cumulative)
        .enumerate()
        .map(|(i, (p, c))| vec![i.to_string(), point_cell(p), cell(*c), cell(k), cell(integrated)])
        .collect();
    let planar = pts.iter().map(|p| (dot(p, &g.frame.0), dot(p, &g.frame.1))).collect();
    Ok(Artifact {
        json,
        header,
        rows,
        plot: Some(Plot { title: format!("k_alpha geodesic, alpha = {alpha}, length {k}"), lines: vec![planar] }),
        violation: false,
    })
}

/// Groups neighbouring corner flags and measures one corner per group.
fn corner_reports(m: &WeightFunction, trace: &BallTrace) -> Vec<Value> {
    let flags = detect_corners(trace);
    let step = std::f64::consts::TAU / trace.thetas.len() as f64;
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for t in flags {
        match groups.last_mut() {
            Some(g) if t - g[g.len() - 1] <= 2.5 * step => g.push(t),
            _ => groups.push(vec![t]),
        }
    }
    let d = |a: &[f64], b: &[f64]| rho_m(m, a, b);
    groups
        .iter()
        .map(|g| {
            let c = g[g.len() / 2];
            match measure_corner(&d, &trace.center, trace.radius, &trace.frame, c - 3.0 * step, c + 3.0 * step) {
                Ok(mc) => json!({
                    "theta": num(mc.theta), "slope_left": num(mc.slope_left),
                    "slope_right": num(mc.slope_right), "jump": num(mc.jump),
                }),
                Err(e) => json!({ "theta": num(c), "error": e.to_string() }),
            }
        })
        .collect()
}

fn ball(cfg: &RunConfig) -> Res<Artifact> {
    let choice = weight_choice(cfg)?;
    let z = point("x", &cfg.x)?.unwrap_or_else(|| vec![1.0, 0.0]);
    let r = require(cfg.radius, "radius")?;
    let n = samples(cfg, 1024)?;
    let m = &choice.weight;
    let trace = trace_sphere(m, &z, r, n).map_err(err)?;
    let convexity = if trace.is_bounded() && n >= 64 {
        let c = convexity_check(&trace).map_err(err)?;
        json!({ "convex": c.convex, "min_cross": num(c.min_cross), "corners": nums(&c.corners) })
    } else {
        Value::Null
    };
    let corners = corner_reports(m, &trace);
    let s_max = trace.s_values.iter().copied().filter(|s| s.is_finite()).fold(0.0, f64::max);
    let star = if s_max > 0.0 { Some(star_shaped_check(m, &z, s_max, 64).map_err(err)?.0) } else { None };
    let nz = norm(&z);
    let base = if nz > 0.0 { nz } else { 1.0 };
    let radii: Vec<f64> = (1..=6).map(|k| base * 10f64.powi(-k)).collect();
    let iso = isotropy_check(m, &z, &radii).map_err(err)?;
    let json = json!({
        "subcommand": "ball",
        "weight": m.label(),
        "center": nums(&z),
        "radius": num(r),
        "bounded": trace.is_bounded(),
        "thetas": nums(&trace.thetas),
        "s_values": nums(&trace.s_values),
        "convexity": convexity,
        "corners": corners,
        "star_shaped": star,
        "isotropy": { "isotropic": iso.isotropic, "radii": nums(&radii), "ratios": nums(&iso.ratios) },
    });
    let header = ["index", "theta", "s", "point"].iter().map(|s| s.to_string()).collect();
    let rows = (0..n)
        .map(|i| {
            let s = trace.s_values[i];
            let p = if s.is_finite() { point_cell(&trace.point(i)) } else { String::new() };
            vec![i.to_string(), cell(trace.thetas[i]), cell(s), p]
        })
        .collect();
    let mut lines: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    let planar = trace.planar();
    for (i, &(u, v)) in planar.iter().enumerate() {
        if trace.s_values[i].is_finite() {
            lines.last_mut().expect("nonempty").push((u, v));
        } else if !lines.last().expect("nonempty").is_empty() {
            lines.push(Vec::new());
        }
    }
    if trace.is_bounded() {
        let first = planar[0];
        lines[0].push(first);
    }
    Ok(Artifact {
        json,
        header,
        rows,
        plot: Some(Plot { title: format!("sphere of radius {r} for {}", m.label()), lines }),
        violation: false,
    })
}

fn load_domain(cfg: &RunConfig, dim: usize) -> Res<DomainSpec> {
    let g = match &cfg.domain {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            serde_json::from_str::<DomainSpec>(&text).map_err(|e| format!("bad domain file: {e}"))?
        }
        None => DomainSpec::punctured(dim),
    };
    g.validate().map_err(err)?;
    Ok(g)
}

/// Closed-form hyperbolic-type distance for domains that have one.
fn reference(g: &DomainSpec, x: &[f64], y: &[f64]) -> Option<f64> {
    match g {
        DomainSpec::Ball { center, radius, .. } => {
            hyperbolic_ball(&scale(&sub(x, center), 1.0 / radius), &scale(&sub(y, center), 1.0 / radius)).ok()
        }
        DomainSpec::HalfSpace { .. } => hyperbolic_half_space(x, y).ok(),
        DomainSpec::Finite { points } if is_punctured(points) => Some(rho_g_punctured(x, y)),
        DomainSpec::Finite { .. } => None,
    }
}

/// Boundary {0, ∞} in any order.
fn is_punctured(points: &[ExtendedPoint]) -> bool {
    points.len() == 2
        && points.iter().any(|p| p.is_infinite())
        && points.iter().any(|p| p.coords().is_some_and(|c| c.iter().all(|&t| t == 0.0)))
}

fn hyperbolic(cfg: &RunConfig) -> Res<Artifact> {
    let x = point("x", &cfg.x)?;
    let y = point("y", &cfg.y)?;
    match (x, y) {
        (Some(x), Some(y)) => hyperbolic_pair(cfg, &x, &y),
        (None, None) => hyperbolic_suites(cfg),
        _ => Err("give both --x and --y, or neither to run the suites".into()),
    }
}

fn hyperbolic_pair(cfg: &RunConfig, x: &[f64], y: &[f64]) -> Res<Artifact> {
    if x.len() != y.len() {
        return Err("--x and --y must have the same dimension".into());
    }
    let g = load_domain(cfg, x.len())?;
    let p = single("p", &cfg.p)?.unwrap_or(f64::NEG_INFINITY);
    let rg = rho_g(&g, x, y).map_err(err)?;
    let delta = seittenranta(p, &g, x, y).map_err(err)?;
    let rp = rho_prime_with(|u, v| power_mean(0.0, u, v), &g, x, y).map_err(err)?;
    let refv = reference(&g, x, y);
    let json = json!({
        "subcommand": "hyperbolic",
        "domain": serde_json::to_value(&g).map_err(err)?,
        "x": nums(x),
        "y": nums(y),
        "rho_g": num(rg),
        "seittenranta_p": num(p),
        "seittenranta": num(delta),
        "rho_prime_a0": num(rp),
        "reference": refv.map(num),
    });
    let header = ["x", "y", "rho_g", "seittenranta_p", "seittenranta", "rho_prime_a0", "reference"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = vec![vec![
        point_cell(x),
        point_cell(y),
        cell(rg),
        cell(p),
        cell(delta),
        cell(rp),
        refv.map(cell).unwrap_or_default(),
    ]];
    Ok(Artifact { json, header, rows, plot: None, violation: false })
}

fn hyperbolic_suites(cfg: &RunConfig) -> Res<Artifact> {
    let n = samples(cfg, 20)?;
    let mut checks: Vec<(String, String, f64, f64, bool)> = Vec::new();

    let props = rho_g_properties_test(n, cfg.seed).map_err(err)?;
    checks.push(("rho_g_properties".into(), "mobius_max_drift".into(), props.mobius_max_drift, MOBIUS_DRIFT_TOL, props.mobius_max_drift <= MOBIUS_DRIFT_TOL));
    checks.push(("rho_g_properties".into(), "monotonicity_violations".into(), props.monotonicity_violations as f64, 0.0, props.monotonicity_violations == 0));
    checks.push(("rho_g_properties".into(), "lower_bound_violations".into(), props.lower_bound_violations as f64, 0.0, props.lower_bound_violations == 0));
    checks.push(("rho_g_properties".into(), "ball_max_deviation".into(), props.ball_max_deviation, SAMPLED_BOUNDARY_TOL, props.ball_max_deviation <= SAMPLED_BOUNDARY_TOL));
    checks.push(("rho_g_properties".into(), "half_space_max_deviation".into(), props.half_space_max_deviation, SAMPLED_BOUNDARY_TOL, props.half_space_max_deviation <= SAMPLED_BOUNDARY_TOL));

    type Profile = fn(f64) -> f64;
    let profiles: [(&str, Profile, bool); 3] = [
        ("sqrt(1-t^2)", |t| (1.0 - t * t).sqrt(), true),
        ("1", |_| 1.0, false),
        ("1-t^2", |t| 1.0 - t * t, false),
    ];
    for (label, f, expect_invariant) in profiles {
        let r = mobius_invariance_test(f, n.max(10) * 5, cfg.seed).map_err(err)?;
        checks.push((format!("mobius_invariance f={label}"), "max_residual".into(), r.max_residual, MOBIUS_TOL, r.invariant == expect_invariant));
    }

    let fz = triangle_fuzz(rho_g_punctured, |rng| random_point(rng, 3, FUZZ_MAGNITUDES.0, FUZZ_MAGNITUDES.1), n * 1000, cfg.seed);
    checks.push(("rho_g_punctured_fuzz".into(), "worst_relative".into(), fz.worst_relative, FUZZ_TOL, fz.passes(FUZZ_TOL)));

    let violation = checks.iter().any(|c| !c.4);
    let json = json!({
        "subcommand": "hyperbolic",
        "samples": n,
        "seed": cfg.seed,
        "checks": checks.iter().map(|(s, q, v, t, pass)| json!({
            "suite": s, "quantity": q, "value": num(*v), "tolerance": num(*t), "pass": pass,
        })).collect::<Vec<_>>(),
        "fuzz": fuzz_json(&fz),
        "violation": violation,
    });
    let header = ["suite", "quantity", "value", "tolerance", "pass"].iter().map(|s| s.to_string()).collect();
    let rows = checks.iter().map(|(s, q, v, t, pass)| vec![s.clone(), q.clone(), cell(*v), cell(*t), pass.to_string()]).collect();
    Ok(Artifact { json, header, rows, plot: None, violation })
}

fn fuzz(cfg: &RunConfig) -> Res<Artifact> {
    let n = samples(cfg, 100_000)?;
    let dim = cfg.dim.unwrap_or(3);
    let choice = weight_choice(cfg)?;
    let desc = descriptor(&choice, dim)?;
    let r = metric_fuzz(&desc, n, cfg.seed).map_err(err)?;
    let violation = !r.passes(FUZZ_TOL);
    let label = choice.weight.label().to_string();
    let json = json!({
        "subcommand": "fuzz",
        "weight": label,
        "dimension": dim,
        "tolerance": FUZZ_TOL,
        "report": fuzz_json(&r),
        "violation": violation,
    });
    Ok(Artifact {
        json,
        header: FUZZ_HEADER.iter().map(|s| s.to_string()).collect(),
        rows: vec![fuzz_cells(&r, &label)],
        plot: None,
        violation,
    })
}
