//! Metric spheres `S(z, r) = {x : d(z, x) = r}` traced in polar form, and
//! shape tests on the traced boundary.
//!
//! Everything is done in a 2-plane through `z`. Angles are measured from
//! the direction pointing from `z` toward the origin, so for a rotation
//! invariant metric the trace is symmetric under `θ ↦ −θ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::relative_metric::rho_m;
use crate::vector::{axpy, basis, norm, orthogonal_unit, scale};
use crate::weight::WeightFunction;

/// A distance on ℝⁿ usable from several threads.
pub type Distance<'a> = &'a (dyn Fn(&[f64], &[f64]) -> f64 + Sync);

#[derive(Debug, Clone, Serialize)]
pub struct BallTrace {
    pub center: Vec<f64>,
    pub radius: f64,
    pub thetas: Vec<f64>,
    /// Euclidean distance from the center to the sphere along each angle;
    /// `+∞` where the ball is unbounded.
    pub s_values: Vec<f64>,
    /// Orthonormal frame of the plane; `frame.0` is the direction `θ = 0`.
    pub frame: (Vec<f64>, Vec<f64>),
}

impl BallTrace {
    /// Point of ℝⁿ on the traced sphere at index `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        point_at(&self.center, &self.frame, self.thetas[i], self.s_values[i])
    }

    /// Planar coordinates `(s cos θ, s sin θ)` relative to the center.
    pub fn planar(&self) -> Vec<(f64, f64)> {
        self.thetas
            .iter()
            .zip(&self.s_values)
            .map(|(t, s)| (s * t.cos(), s * t.sin()))
            .collect()
    }

    pub fn is_bounded(&self) -> bool {
        self.s_values.iter().all(|s| s.is_finite())
    }
}

fn point_at(z: &[f64], frame: &(Vec<f64>, Vec<f64>), theta: f64, s: f64) -> Vec<f64> {
    let dir = axpy(&scale(&frame.0, theta.cos()), theta.sin(), &frame.1);
    axpy(z, s, &dir)
}

/// Frame whose first vector points from `z` toward the origin.
pub fn default_frame(z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = z.len();
    if n < 2 {
        return Err(invalid("ball tracing needs dimension at least 2"));
    }
    let nz = norm(z);
    if nz == 0.0 {
        return Ok((basis(n, 0), basis(n, 1)));
    }
    let e1 = scale(z, -1.0 / nz);
    let e2 = orthogonal_unit(&e1);
    Ok((e1, e2))
}

/// `n` angles `−π + 2πi/n`, symmetric about 0.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / n as f64)
        .collect()
}

// Beyond ~2^48·s0 a ratio approaching r from below can round onto r.
const MAX_DOUBLINGS: usize = 48;

/// Smallest `s` on the doubling grid with `d(z, z + s·e(θ)) >= r`, then
/// bisection to full precision. `+∞` when no crossing is found.
fn solve_direction(d: Distance<'_>, z: &[f64], frame: &(Vec<f64>, Vec<f64>), theta: f64, r: f64, s0: f64) -> f64 {
    let phi = |s: f64| d(z, &point_at(z, frame, theta, s)) - r;
    let (mut lo, mut hi) = (0.0, s0);
    let mut found = false;
    for _ in 0..MAX_DOUBLINGS {
        if phi(hi) >= 0.0 {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !found {
        return f64::INFINITY;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if phi(lo).abs() < phi(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Traces `S_d(z, r)` at the given angles. `s0 > 0` seeds the bracket.
pub fn trace_sphere_with(
    d: Distance<'_>,
    z: &[f64],
    r: f64,
    thetas: &[f64],
    frame: (Vec<f64>, Vec<f64>),
    s0: f64,
) -> Result<BallTrace> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    let s0 = if s0 > 0.0 && s0.is_finite() { s0 } else { r };
    let s_values: Vec<f64> = thetas
        .par_iter()
        .map(|&t| solve_direction(d, z, &frame, t, r, s0))
        .collect();
    Ok(BallTrace {
        center: z.to_vec(),
        radius: r,
        thetas: thetas.to_vec(),
        s_values,
        frame,
    })
}

/// Traces the `ρ_M` sphere about `z` at `n_angles` uniform angles.
pub fn trace_sphere(m: &WeightFunction, z: &[f64], r: f64, n_angles: usize) -> Result<BallTrace> {
    if n_angles < 3 {
        return Err(invalid("need at least 3 angles"));
    }
    let frame = default_frame(z)?;
    let nz = norm(z);
    let s0 = r * m.eval(nz, nz);
    let d = |a: &[f64], b: &[f64]| rho_m(m, a, b);
    trace_sphere_with(&d, z, r, &uniform_angles(n_angles), frame, s0)
}

#[derive(Debug, Clone, Serialize)]
pub struct IsotropyReport {
    pub isotropic: bool,
    /// `sup/inf` over directions of `d(z, z + ρ e(θ))`, per radius.
    pub ratios: Vec<f64>,
}

/// Tolerance on the final sup/inf ratio.
pub const ISOTROPY_TOL: f64 = 1e-4;

/// Isotropy at `z`: the spread of `d(z, ·)` over a Euclidean circle of
/// radius ρ shrinks to 1 as ρ → 0 along `radii`.
pub fn isotropy_check_with(d: Distance<'_>, z: &[f64], radii: &[f64]) -> Result<IsotropyReport> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid("radii must be a decreasing sequence of positive reals"));
    }
    let frame = default_frame(z)?;
    let thetas = uniform_angles(256);
    let ratios: Vec<f64> = radii
        .iter()
        .map(|&rho| {
            let (lo, hi) = thetas
                .par_iter()
                .map(|&t| d(z, &point_at(z, &frame, t, rho)))
                .fold(|| (f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)))
                .reduce(|| (f64::INFINITY, 0.0_f64), |a, b| (a.0.min(b.0), a.1.max(b.1)));
            if hi == lo {
                1.0
            } else {
                hi / lo
            }
        })
        .collect();
    let last = *ratios.last().expect("nonempty");
    Ok(IsotropyReport {
        isotropic: last <= 1.0 + ISOTROPY_TOL,
        ratios,
    })
}

pub fn isotropy_check(m: &WeightFunction, z: &[f64], radii: &[f64]) -> Result<IsotropyReport> {
    let d = |a: &[f64], b: &[f64]| rho_m(m, a, b);
    isotropy_check_with(&d, z, radii)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarWitness {
    pub theta: f64,
    pub s0: f64,
    pub s1: f64,
}

/// Whether `s ↦ d(z, z + s e(θ))` is nondecreasing on `[0, s_max]` (256
/// samples) for each of `n_angles` directions. `z = 0` is trivially true.
pub fn star_shaped_check_with(
    d: Distance<'_>,
    z: &[f64],
    s_max: f64,
    n_angles: usize,
) -> Result<(bool, Option<StarWitness>)> {
    if !(s_max > 0.0) {
        return Err(invalid("s_max must be positive"));
    }
    if norm(z) == 0.0 {
        return Ok((true, None));
    }
    let frame = default_frame(z)?;
    let thetas = uniform_angles(n_angles.max(1));
    let witness = thetas.par_iter().find_map_first(|&t| {
        let mut prev = (0.0, 0.0);
        for k in 1..=256 {
            let s = s_max * k as f64 / 256.0;
            let v = d(z, &point_at(z, &frame, t, s));
            if v < prev.1 * (1.0 - 1e-12) {
                return Some(StarWitness { theta: t, s0: prev.0, s1: s });
            }
            prev = (s, v);
        }
        None
    });
    Ok((witness.is_none(), witness))
}

pub fn star_shaped_check(m: &WeightFunction, z: &[f64], s_max: f64, n_angles: usize) -> Result<(bool, Option<StarWitness>)> {
    let d = |a: &[f64], b: &[f64]| rho_m(m, a, b);
    star_shaped_check_with(&d, z, s_max, n_angles)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub convex: bool,
    /// Angles where the boundary turns the wrong way or `ds/dθ` jumps.
    pub corners: Vec<f64>,
    /// Smallest normalized cross product of consecutive edges.
    pub min_cross: f64,
}

/// Cross products below `−CROSS_TOL·scale²` count as non-convex turns.
pub const CROSS_TOL: f64 = 1e-8;
/// A slope jump counts as a corner above this multiple of the local median.
pub const CORNER_FACTOR: f64 = 10.0;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// `ds/dθ` jumps between consecutive forward differences, cyclically; NaN
/// next to unbounded directions.
fn slope_jumps(thetas: &[f64], s: &[f64]) -> Vec<f64> {
    let n = thetas.len();
    let slope = |i: usize| {
        let j = (i + 1) % n;
        let mut dt = thetas[j] - thetas[i];
        if dt <= 0.0 {
            dt += std::f64::consts::TAU;
        }
        if s[i].is_finite() && s[j].is_finite() {
            (s[j] - s[i]) / dt
        } else {
            f64::NAN
        }
    };
    (0..n).map(|i| (slope(i) - slope((i + n - 1) % n)).abs()).collect()
}

/// Angles where `ds/dθ` jumps by more than [`CORNER_FACTOR`] times the
/// median jump of the 16 neighbours (and more than `1e−6·r`). Works on
/// partially unbounded traces by skipping windows that touch `+∞`.
pub fn detect_corners(trace: &BallTrace) -> Vec<f64> {
    let n = trace.thetas.len();
    let jumps = slope_jumps(&trace.thetas, &trace.s_values);
    let floor = 1e-6 * trace.radius;
    let window = 8;
    (0..n)
        .filter(|&i| {
            let local: Vec<f64> = (0..=2 * window)
                .map(|k| (i + n + k - window) % n)
                .filter(|&j| j != i)
                .map(|j| jumps[j])
                .collect();
            !local.iter().any(|v| v.is_nan()) && jumps[i] > floor && jumps[i] > CORNER_FACTOR * median(local)
        })
        .map(|i| trace.thetas[i])
        .collect()
}

/// Convexity of the region bounded by a full-circle trace (angles sorted
/// increasingly over one turn).
pub fn convexity_check(trace: &BallTrace) -> Result<ConvexityReport> {
    let n = trace.thetas.len();
    if n < 64 {
        return Err(invalid("convexity_check needs at least 64 angles"));
    }
    if !trace.is_bounded() {
        return Err(Error::UnboundedBall(format!(
            "sphere of radius {} about {:?} is unbounded",
            trace.radius, trace.center
        )));
    }
    let pts = trace.planar();
    let scale2 = trace.s_values.iter().fold(0.0_f64, |a, &s| a.max(s)).powi(2);
    let edge = |i: usize| {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        (b.0 - a.0, b.1 - a.1)
    };
    let cross: Vec<f64> = (0..n)
        .map(|i| {
            let (e0, e1) = (edge((i + n - 1) % n), edge(i));
            (e0.0 * e1.1 - e0.1 * e1.0) / scale2
        })
        .collect();
    let min_cross = cross.iter().copied().fold(f64::INFINITY, f64::min);
    let kinks = detect_corners(trace);
    let corners: Vec<f64> = (0..n)
        .filter(|&i| cross[i] < -CROSS_TOL || kinks.contains(&trace.thetas[i]))
        .map(|i| trace.thetas[i])
        .collect();
    Ok(ConvexityReport {
        convex: min_cross >= -CROSS_TOL,
        corners,
        min_cross,
    })
}

/// The inner corner of the `ρ_{∞,q}` sphere of radius `r` about `e₁`:
/// the angle `arccos(r/2)` and the right-hand limit of `ds/dθ` there
/// (the left-hand limit is 0).
pub fn infty_q_corner(q: f64, r: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid(format!("q must lie in (0, 1], got {q}")));
    }
    if !(r > 0.0 && r < 2.0) {
        return Err(Error::OutOfRange(format!("r must lie in (0, 2), got {r}")));
    }
    if r * r * q >= 2.0 {
        return Err(Error::OutOfRange(format!("r²q = {} must be below 2", r * r * q)));
    }
    let theta0 = (r / 2.0).acos();
    let slope = r * r * q * (4.0 - r * r).sqrt() / (2.0 - r * r * q);
    Ok((theta0, slope))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerMeasurement {
    pub theta: f64,
    pub slope_left: f64,
    pub slope_right: f64,
    /// `slope_right − slope_left`.
    pub jump: f64,
}

/// Locates a kink of `θ ↦ s(θ)` inside `[lo, hi]` by repeated re-tracing
/// around the largest slope jump, then measures one-sided slopes by
/// quadratic extrapolation from samples `θc ± h, ±2h, ±3h`.
pub fn measure_corner(
    d: Distance<'_>,
    z: &[f64],
    r: f64,
    frame: &(Vec<f64>, Vec<f64>),
    mut lo: f64,
    mut hi: f64,
) -> Result<CornerMeasurement> {
    let nz = norm(z);
    let solve = |t: f64| solve_direction(d, z, frame, t, r, r * nz.max(1.0));
    const SUB: usize = 64;
    while hi - lo > 1e-6 {
        let thetas: Vec<f64> = (0..=SUB).map(|k| lo + (hi - lo) * k as f64 / SUB as f64).collect();
        let s: Vec<f64> = thetas.par_iter().map(|&t| solve(t)).collect();
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::UnboundedBall("corner search met an unbounded direction".into()));
        }
        let slopes: Vec<f64> = (0..SUB).map(|k| (s[k + 1] - s[k]) / (thetas[k + 1] - thetas[k])).collect();
        let k = (1..SUB)
            .max_by(|&a, &b| {
                let ja = (slopes[a] - slopes[a - 1]).abs();
                let jb = (slopes[b] - slopes[b - 1]).abs();
                ja.total_cmp(&jb)
            })
            .expect("SUB > 1");
        lo = thetas[k - 1];
        hi = thetas[k + 1];
    }
    let theta = 0.5 * (lo + hi);
    let h = 1e-4;
    // Derivative at 0 of the quadratic through (h, a), (2h, b), (3h, c).
    let one_sided = |sign: f64| {
        let a = solve(theta + sign * h);
        let b = solve(theta + sign * 2.0 * h);
        let c = solve(theta + sign * 3.0 * h);
        sign * (-5.0 * a + 8.0 * b - 3.0 * c) / (2.0 * h)
    };
    let slope_left = one_sided(-1.0);
    let slope_right = one_sided(1.0);
    Ok(CornerMeasurement {
        theta,
        slope_left,
        slope_right,
        jump: slope_right - slope_left,
    })
}

/// Largest radius among `r0·2^{−k}` whose traced sphere fits in a Euclidean
/// ball of diameter `0.1·|z|` about `z`.
pub fn small_radius(d: Distance<'_>, z: &[f64], r0: f64) -> Result<f64> {
    let nz = norm(z);
    if nz == 0.0 {
        return Err(invalid("small_radius needs z ≠ 0"));
    }
    let frame = default_frame(z)?;
    let thetas = uniform_angles(64);
    let mut r = r0;
    for _ in 0..60 {
        let t = trace_sphere_with(d, z, r, &thetas, frame.clone(), r * nz)?;
        let s_max = t.s_values.iter().fold(0.0_f64, |a, &s| a.max(s));
        if 2.0 * s_max <= 0.1 * nz {
            return Ok(r);
        }
        r *= 0.5;
    }
    Err(invalid("no small radius found"))
}
