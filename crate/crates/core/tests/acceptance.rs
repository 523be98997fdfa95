//! Acceptance suite: twelve numerical criteria with pinned tolerances.
//! Prints one PASS/FAIL line per criterion and exits nonzero on any FAIL.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use relmetric::ball::{default_frame, detect_corners, infty_q_corner, measure_corner, small_radius, trace_sphere_with, uniform_angles, convexity_check};
use relmetric::fuzz::triangle_fuzz;
use relmetric::hyperbolic::{
    hyperbolic_ball, hyperbolic_half_space, mobius_invariance_test, rho_g, rho_g_punctured, DomainSpec,
};
use relmetric::quasiconvexity::{
    c_m_homogeneous, c_pq_bounds, ff_constant, ff_path_length_bound, inverted_segment_length, SearchConfig,
};
use relmetric::quasihyperbolic::{geodesic, inequality_chain_check, k_alpha, k_one, path_length_default, Path};
use relmetric::relative_metric::{
    bilipschitz_estimate, metric_fuzz, metric_on_line_fuzz, pq_is_metric, rho_pq, MetricDescriptor, MetricKind,
};
use relmetric::vector::{norm, random_point, random_unit, scale};
use relmetric::WeightFunction;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn metricity_region() -> Outcome {
    let inside: [(f64, f64); 12] = [
        (1.0, 0.0),
        (2.0, 0.0),
        (0.75, 0.25),
        (2.0, 0.25),
        (f64::INFINITY, 0.25),
        (0.5, 0.5),
        (1.0, 0.5),
        (4.0, 0.5),
        (0.5, 0.75),
        (3.0, 0.75),
        (1.0 / 3.0, 1.0),
        (1.0, 1.0),
    ];
    let outside: [(f64, f64); 4] = [(0.3, 0.5), (0.5, 0.2), (1.0, 1.5), (2.0, 1.5)];
    let mut worst_inside: f64 = 0.0;
    for (i, &(p, q)) in inside.iter().enumerate() {
        assert!(pq_is_metric(p, q));
        let d = MetricDescriptor::new(MetricKind::PqRelative { p, q }, 3).unwrap();
        let r = metric_fuzz(&d, 100_000, 100 + i as u64).unwrap();
        worst_inside = worst_inside.max(r.worst_relative);
    }
    let mut weakest_outside = f64::INFINITY;
    for (i, &(p, q)) in outside.iter().enumerate() {
        assert!(!pq_is_metric(p, q));
        let r = metric_on_line_fuzz(&WeightFunction::pq(p, q), 100_000, 200 + i as u64).unwrap();
        weakest_outside = weakest_outside.min(r.worst_relative);
    }
    outcome(
        worst_inside <= 1e-12 && weakest_outside > 1e-12,
        format!("inside worst rel violation {worst_inside:.2e} (<= 1e-12); outside weakest {weakest_outside:.2e} (> 1e-12)"),
    )
}

const GEODESIC_SAMPLES: usize = 5000;

fn geodesic_oracle() -> Outcome {
    let worked = k_alpha(0.5, &[2.0, 0.0], &[0.0, 1.0]).unwrap();
    let worst = (1..=9)
        .into_par_iter()
        .map(|k| {
            let alpha = k as f64 / 10.0;
            let mut rng = ChaCha8Rng::seed_from_u64(300 + k as u64);
            let mut worst: f64 = 0.0;
            let mut done = 0;
            while done < 1000 {
                let x = random_point(&mut rng, 3, 1e-2, 1e2);
                let y = random_point(&mut rng, 3, 1e-2, 1e2);
                // Pairs whose rotated angle reaches π have no smooth geodesic.
                let Ok(g) = geodesic(alpha, &x, &y) else { continue };
                let k = k_alpha(alpha, &x, &y).unwrap();
                let pts = g.sample(GEODESIC_SAMPLES);
                let len = path_length_default(alpha, &Path::Polyline(&pts)).unwrap();
                worst = worst.max((len - k).abs() / k);
                done += 1;
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        worst <= 1e-6 && (worked - 2.0).abs() <= 1e-12,
        format!("max rel disagreement {worst:.2e} (<= 1e-6); k_1/2(2e1,e2) = {worked:.15}"),
    )
}

fn alpha_to_one_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = random_point(&mut rng, 3, 0.1, 10.0);
        let y = random_point(&mut rng, 3, 0.1, 10.0);
        worst = worst.max((k_alpha(1.0 - 1e-4, &x, &y).unwrap() - k_one(&x, &y).unwrap()).abs());
    }
    outcome(worst <= 1e-3, format!("max |k_(1-1e-4) - k| = {worst:.2e} (<= 1e-3, magnitudes in [0.1, 10])"))
}

fn inequality_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut ordered = 0;
    for _ in 0..100_000 {
        let x = random_point(&mut rng, 3, 1e-3, 1e3);
        let y = random_point(&mut rng, 3, 1e-3, 1e3);
        let alpha = rng.random::<f64>() * 0.999;
        if inequality_chain_check(alpha, &x, &y).unwrap().nondecreasing {
            ordered += 1;
        }
    }
    let mut worst_eq: f64 = 0.0;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    for _ in 0..1000 {
        let y = random_point(&mut rng, 3, 0.1, 10.0);
        let t = 0.05 + 5.0 * rng.random::<f64>();
        let alpha = 0.05 + 0.9 * rng.random::<f64>();
        let v = inequality_chain_check(alpha, &scale(&y, t), &y).unwrap().values;
        worst_eq = worst_eq.max(rel(v[0], v[1]));
        let v = inequality_chain_check(alpha, &scale(&y, -t), &y).unwrap().values;
        worst_eq = worst_eq.max(rel(v[1], v[2]));
        let v = inequality_chain_check(alpha, &scale(&y, -1.0), &y).unwrap().values;
        worst_eq = worst_eq.max(rel(v[3], v[4]));
        let x = random_point(&mut rng, 3, 0.1, 10.0);
        if x != y {
            let v = inequality_chain_check(0.0, &x, &y).unwrap().values;
            worst_eq = worst_eq.max(rel(v[2], v[3]));
        }
    }
    outcome(
        ordered == 100_000 && worst_eq <= 1e-9,
        format!("{ordered}/100000 ordered; worst equality-case gap {worst_eq:.2e} (<= 1e-9)"),
    )
}

fn square_root_constant() -> Outcome {
    let cfg = SearchConfig::default();
    let mut worst: f64 = 0.0;
    for p in [0.5, 0.75, 1.0, 2.0, 10.0] {
        let e = c_m_homogeneous(&WeightFunction::power_mean_pow(p, 0.5), 0.5, &cfg).unwrap();
        let want = 2f64.sqrt().max(2f64.powf(1.0 - 1.0 / (2.0 * p)));
        worst = worst.max((e.c_estimate - want).abs());
    }
    outcome(worst <= 1e-6, format!("max |c - max(sqrt2, 2^(1-1/(2p)))| = {worst:.2e} (<= 1e-6)"))
}

fn quasiconvexity_bounds() -> Outcome {
    let cfg = SearchConfig::default();
    let samples = [(1.0, 0.5), (2.0, 0.5), (0.5, 0.5), (0.75, 0.25), (4.0, 0.25), (0.5, 0.75), (10.0, 0.75), (f64::INFINITY, 0.9)];
    let mut inside = 0;
    for &(p, q) in &samples {
        assert!(pq_is_metric(p, q));
        let e = c_m_homogeneous(&WeightFunction::power_mean_pow(p, q), q, &cfg).unwrap();
        let (lo, hi) = c_pq_bounds(p, q);
        if e.converged && e.c_estimate >= lo - 1e-6 && e.c_estimate <= hi + 1e-6 {
            inside += 1;
        }
    }
    let mut diverged = 0;
    for p in [1.0, 2.0, f64::INFINITY] {
        let e = c_m_homogeneous(&WeightFunction::power_mean_pow(p, 1.0), 1.0, &cfg).unwrap();
        if !e.converged {
            diverged += 1;
        }
    }
    outcome(inside == 8 && diverged == 3, format!("{inside}/8 within bounds (±1e-6); {diverged}/3 q=1 searches diverge"))
}

fn ball_shapes() -> Outcome {
    let e1 = [1.0, 0.0];
    let frame = default_frame(&e1).unwrap();
    let mut convex = 0;
    for p in [1.0, 2.0, 4.0] {
        let d = |a: &[f64], b: &[f64]| rho_pq(p, 0.5, a, b);
        let r = small_radius(&d, &e1, 0.5).unwrap();
        let t = trace_sphere_with(&d, &e1, r, &uniform_angles(1024), frame.clone(), r).unwrap();
        let c = convexity_check(&t).unwrap();
        if c.convex && c.corners.is_empty() {
            convex += 1;
        }
    }
    let mut corners = 0;
    let (mut worst_theta, mut worst_jump): (f64, f64) = (0.0, 0.0);
    for q in [0.25, 0.5, 1.0] {
        for r in [0.2, 0.5, 1.0] {
            let d = |a: &[f64], b: &[f64]| rho_pq(f64::INFINITY, q, a, b);
            let (t0, slope) = infty_q_corner(q, r).unwrap();
            let t = trace_sphere_with(&d, &e1, r, &uniform_angles(1024), frame.clone(), r).unwrap();
            let Some(near) = detect_corners(&t).into_iter().min_by(|a, b| (a - t0).abs().total_cmp(&(b - t0).abs())) else {
                worst_theta = f64::INFINITY;
                continue;
            };
            let m = measure_corner(&d, &e1, r, &frame, near - 0.01, near + 0.01).unwrap();
            let (dt, dj) = ((m.theta - t0).abs(), (m.jump - slope).abs());
            worst_theta = worst_theta.max(dt);
            worst_jump = worst_jump.max(dj);
            if dt <= 1e-3 && dj <= 1e-4 {
                corners += 1;
            }
        }
    }
    outcome(
        convex == 3 && corners == 9,
        format!("{convex}/3 smooth balls convex; {corners}/9 corners (max dθ {worst_theta:.1e} <= 1e-3, max d(jump) {worst_jump:.1e} <= 1e-4)"),
    )
}

/// Convex, nondecreasing, with `f(t)/t` nonincreasing and `f(0) >= 1`.
fn random_convex_f(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> f64 + use<> {
    let a = rng.random_range(1.0..5.0);
    let b = rng.random_range(0.0..5.0);
    let c = a * rng.random::<f64>();
    let d = b + rng.random_range(0.0..20.0);
    let s: f64 = rng.random_range(0.0..3.0);
    let e = rng.random_range(0.0..3.0);
    move |t: f64| (a + b * t).max(c + d * t) + s.hypot(e * t)
}

fn product_weight_paths() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let mut worst_ratio: f64 = 0.0;
    let mut worst_cxy: f64 = 0.0;
    for _ in 0..1000 {
        let f = random_convex_f(&mut rng);
        let x = random_point(&mut rng, 3, 1e-2, 1e2);
        let y = random_point(&mut rng, 3, 1e-2, 1e2);
        let (_, ratio) = ff_path_length_bound(&f, &x, &y).unwrap();
        worst_ratio = worst_ratio.max(ratio);
        let c = rng.random_range(0.1..10.0);
        let (_, r) = inverted_segment_length(c, &x, &y).unwrap();
        worst_cxy = worst_cxy.max(r);
    }
    outcome(
        worst_ratio <= ff_constant() && worst_cxy <= 1.0 + 1e-6,
        format!("max f·f ratio {worst_ratio:.5} (<= {:.5}); max cxy ratio {worst_cxy:.9} (<= 1+1e-6)", ff_constant()),
    )
}

fn mobius_product_weights() -> Outcome {
    let good = mobius_invariance_test(|t| (1.0 - t * t).sqrt(), 100, 900).unwrap();
    let flat = mobius_invariance_test(|_| 1.0, 100, 900).unwrap();
    let quad = mobius_invariance_test(|t| 1.0 - t * t, 100, 900).unwrap();
    outcome(
        good.invariant && good.max_residual <= 1e-9 && flat.witness.is_some() && quad.witness.is_some(),
        format!(
            "sqrt(1-x^2) residual {:.1e} (<= 1e-9); f=1 witness: {}; f=1-x^2 witness: {}",
            good.max_residual,
            flat.witness.is_some(),
            quad.witness.is_some()
        ),
    )
}

fn rho_g_metric() -> Outcome {
    let r = triangle_fuzz(rho_g_punctured, |rng| random_point(rng, 3, 1e-3, 1e3), 1_000_000, 1000);
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst_eq: f64 = 0.0;
    for _ in 0..1000 {
        let u = random_unit(&mut rng, 3);
        let x = scale(&u, rng.random_range(1.0..100.0));
        let y = scale(&u, rng.random_range(0.01..1.0));
        let lhs = rho_g_punctured(&x, &y);
        let rhs = rho_g_punctured(&x, &u) + rho_g_punctured(&u, &y);
        worst_eq = worst_eq.max((lhs - rhs).abs() / lhs);
    }
    outcome(
        r.passes(1e-12) && worst_eq <= 1e-10,
        format!("10^6 triples worst rel violation {:.1e} (<= 1e-12); collinear equality gap {worst_eq:.1e} (<= 1e-10)", r.worst_relative),
    )
}

fn rho_g_hyperbolic() -> Outcome {
    let ball = DomainSpec::unit_ball(3);
    let half = DomainSpec::upper_half_space(3);
    let mut rng = ChaCha8Rng::seed_from_u64(1100);
    let pairs: Vec<_> = (0..100)
        .map(|_| {
            let bx = scale(&random_unit(&mut rng, 3), 0.9 * rng.random::<f64>());
            let by = scale(&random_unit(&mut rng, 3), 0.9 * rng.random::<f64>());
            let mut hp = || vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.1..2.0)];
            let (hx, hy) = (hp(), hp());
            (bx, by, hx, hy)
        })
        .collect();
    let (mut wb, mut wh): (f64, f64) = (0.0, 0.0);
    for (bx, by, hx, hy) in &pairs {
        wb = wb.max((rho_g(&ball, bx, by).unwrap() - hyperbolic_ball(bx, by).unwrap()).abs());
        wh = wh.max((rho_g(&half, hx, hy).unwrap() - hyperbolic_half_space(hx, hy).unwrap()).abs());
    }
    outcome(wb <= 1e-4 && wh <= 1e-4, format!("max deviation ball {wb:.1e}, half-space {wh:.1e} (<= 1e-4)"))
}

fn bilipschitz() -> Outcome {
    let d = MetricDescriptor::new(MetricKind::PqRelative { p: f64::INFINITY, q: 1.0 }, 3).unwrap();
    let (lo, hi) = bilipschitz_estimate(|x: &[f64]| scale(x, norm(x)), &d, 100_000, 1200).unwrap();
    let s = MetricDescriptor::new(MetricKind::Spherical, 3).unwrap();
    let inv = |x: &[f64]| scale(x, 1.0 / norm(x).powi(2));
    let (ilo, ihi) = bilipschitz_estimate(inv, &s, 100_000, 1201).unwrap();
    outcome(
        lo >= 0.5 - 1e-9 && hi <= 2.0 + 1e-9 && ilo >= 1.0 - 1e-9 && ihi <= 1.0 + 1e-9,
        format!("|x|x: [{lo:.6}, {hi:.6}] within [1/2, 2]; inversion: [{ilo:.12}, {ihi:.12}]"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("metricity region of rho_pq", metricity_region),
        ("closed-form k_alpha vs geodesic length", geodesic_oracle),
        ("alpha -> 1 limit", alpha_to_one_limit),
        ("five-term inequality chain", inequality_chain),
        ("quasiconvexity constant of rho_(p,1/2)", square_root_constant),
        ("quasiconvexity bounds and q=1 divergence", quasiconvexity_bounds),
        ("ball convexity and inner corners", ball_shapes),
        ("product-weight path constructions", product_weight_paths),
        ("Mobius invariance of product weights", mobius_product_weights),
        ("rho_G metric on punctured space", rho_g_metric),
        ("rho_G equals the hyperbolic metric", rho_g_hyperbolic),
        ("bilipschitz estimates", bilipschitz),
    ];
    // Optional criterion numbers on the command line select a subset.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        println!("{} {:>2} {name}: {} [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
