//! The α-quasihyperbolic distance
//! `k_α(x, y) = inf ∫_γ |z|^{−α} |dz|` on ℝⁿ∖{0}, its geodesics and a
//! numerical length oracle.
//!
//! With `β = 1 − α` the map `z ↦ z^β` (in the plane of `x` and `y`) takes
//! `k_α`-geodesics to straight segments, which yields the closed form
//! `β k_α = √(|x|^{2β} + |y|^{2β} − 2|x|^β|y|^β cos βθ)`.

use std::cell::Cell;

use serde::Serialize;

use crate::error::{domain, invalid, Result};
use crate::means::s_quasimean;
use crate::quadrature::{adaptive_simpson, DEFAULT_MAX_DEPTH, DEFAULT_REL_TOL};
use crate::vector::{add, angle, axpy, dist, norm, plane_frame, scale, sub};

/// Samples closer to the origin than this are rejected.
pub const ORIGIN_EPS: f64 = 1e-300;

fn check_alpha(alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    Ok(1.0 - alpha)
}

fn nonzero(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(domain("k_alpha is undefined at the origin"));
    }
    if !nx.is_finite() || !ny.is_finite() {
        return Err(invalid("points must be finite"));
    }
    Ok((nx, ny))
}

/// `β k` for norms `nx, ny`, angle `theta` and `β > 0`, written as
/// `√((b·expm1(βΔ))² + ab(2 sin(βθ/2))²)` with `Δ = log(nx/ny)` so that it
/// stays accurate for small `β` and nearby points.
pub(crate) fn closed_form(beta: f64, nx: f64, ny: f64, theta: f64) -> f64 {
    let delta = nx.ln() - ny.ln();
    let (a, b) = (nx.powf(beta), ny.powf(beta));
    let radial = b * (beta * delta).exp_m1() / beta;
    let angular = 2.0 * (0.5 * beta * theta).sin() / beta;
    (radial * radial + a * b * angular * angular).sqrt()
}

/// `k_α(x, y)` for `α ∈ [0, 1)`.
pub fn k_alpha(alpha: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let beta = check_alpha(alpha)?;
    let (nx, ny) = nonzero(x, y)?;
    if x == y {
        return Ok(0.0);
    }
    Ok(closed_form(beta, nx, ny, angle(x, y)))
}

/// The quasihyperbolic distance `k = k_1 = √(θ² + log²(|x|/|y|))`.
pub fn k_one(x: &[f64], y: &[f64]) -> Result<f64> {
    let (nx, ny) = nonzero(x, y)?;
    if x == y {
        return Ok(0.0);
    }
    Ok(angle(x, y).hypot(nx.ln() - ny.ln()))
}

/// `(|x|^β + |y|^β)/β`, an upper bound for `k_α(x, y)`.
pub fn k_upper_bound(alpha: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let beta = check_alpha(alpha)?;
    let (nx, ny) = nonzero(x, y)?;
    Ok((nx.powf(beta) + ny.powf(beta)) / beta)
}

/// The `k_α` geodesic from `x` to `y` in polar form.
///
/// Coordinates are normalized so the shorter endpoint sits at `(1, 0)` and
/// the other at `(r, θ₁)`, `r >= 1`. The curve is
/// `r(θ)^β sin(βθ + c2) = c1` for `θ ∈ [0, θ₁]`.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicPolar {
    pub c1: f64,
    pub c2: f64,
    pub beta: f64,
    pub theta_range: (f64, f64),
    /// Norm of the shorter endpoint.
    pub scale: f64,
    /// Normalized magnitude of the longer endpoint.
    pub r: f64,
    /// Orthonormal frame of the plane; `frame.0` points at the shorter endpoint.
    pub frame: (Vec<f64>, Vec<f64>),
    /// The endpoints were swapped during normalization.
    pub swapped: bool,
    /// `θ₁ = 0`: the geodesic is a radial segment and `c1`, `c2` are unused.
    pub radial: bool,
    /// `π − c2`, kept separately for accuracy when `c2` is obtuse.
    reflected: f64,
}

/// Geodesic of `k_α` between nonzero `x` and `y`.
pub fn geodesic(alpha: f64, x: &[f64], y: &[f64]) -> Result<GeodesicPolar> {
    let beta = check_alpha(alpha)?;
    let (nx, ny) = nonzero(x, y)?;
    let swapped = nx < ny;
    let (far, near, nfar, nnear) = if swapped { (y, x, ny, nx) } else { (x, y, nx, ny) };
    let theta1 = angle(far, near);
    if beta * theta1 >= std::f64::consts::PI {
        return Err(domain("the geodesic passes through the origin"));
    }
    let frame = plane_frame(near, far);
    let r = nfar / nnear;
    let rb = r.powf(beta);
    let radial = theta1 == 0.0;
    let (u, v) = (rb * (beta * theta1).cos(), rb * (beta * theta1).sin());
    let (c1, c2, reflected) = if radial {
        (0.0, 0.0, std::f64::consts::PI)
    } else {
        let chord = (u - 1.0).hypot(v);
        (v / chord, v.atan2(1.0 - u), v.atan2(u - 1.0))
    };
    Ok(GeodesicPolar {
        c1,
        c2,
        beta,
        theta_range: (0.0, theta1),
        scale: nnear,
        r,
        frame,
        swapped,
        radial,
        reflected,
    })
}

impl GeodesicPolar {
    /// `sin(βθ + c2)`, evaluated through `π − c2` when `c2` is obtuse.
    fn phase_sine(&self, theta: f64) -> f64 {
        if self.c2 > std::f64::consts::FRAC_PI_2 {
            (self.reflected - self.beta * theta).sin()
        } else {
            (self.beta * theta + self.c2).sin()
        }
    }

    /// Normalized radius `r(θ)` (shorter endpoint at radius 1).
    pub fn normalized_radius(&self, theta: f64) -> f64 {
        if self.radial {
            return f64::NAN;
        }
        (self.c1 / self.phase_sine(theta)).powf(1.0 / self.beta)
    }

    /// Relative residual of `r(θ)^β sin(βθ + c2) = c1`.
    pub fn residual(&self, theta: f64) -> f64 {
        let lhs = self.normalized_radius(theta).powf(self.beta) * self.phase_sine(theta);
        (lhs - self.c1).abs() / self.c1
    }

    /// Point of ℝⁿ at polar angle `θ` with normalized radius `rn`.
    fn lift(&self, theta: f64, rn: f64) -> Vec<f64> {
        let dir = axpy(&scale(&self.frame.0, theta.cos()), theta.sin(), &self.frame.1);
        scale(&dir, self.scale * rn)
    }

    /// Point on the geodesic at polar angle `θ ∈ [0, θ₁]`.
    pub fn point_at(&self, theta: f64) -> Vec<f64> {
        self.lift(theta, self.normalized_radius(theta))
    }

    /// Closed-form `k_α`-length.
    pub fn length(&self) -> f64 {
        let rb = self.r.powf(self.beta);
        let bt = self.beta * self.theta_range.1;
        let chord = (rb * bt.cos() - 1.0).hypot(rb * bt.sin());
        self.scale.powf(self.beta) * chord / self.beta
    }

    /// `n >= 2` points, evenly spaced in `k_α`-length, ordered from the
    /// first argument of [`geodesic`] to the second.
    pub fn sample(&self, n: usize) -> Vec<Vec<f64>> {
        let n = n.max(2);
        let rb = self.r.powf(self.beta);
        let bt = self.beta * self.theta_range.1;
        let (u, v) = (rb * bt.cos(), rb * bt.sin());
        let mut pts: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                if i == n - 1 {
                    return self.lift(self.theta_range.1, self.r);
                }
                if self.radial {
                    let rn = (1.0 + s * (rb - 1.0)).powf(1.0 / self.beta);
                    return self.lift(0.0, rn);
                }
                // Point on the image segment from 1 to w = u + iv.
                let (zu, zv) = (1.0 + s * (u - 1.0), s * v);
                let theta = zv.atan2(zu) / self.beta;
                if i == 0 {
                    self.lift(0.0, 1.0)
                } else {
                    self.point_at(theta)
                }
            })
            .collect();
        if !self.swapped {
            pts.reverse();
        }
        pts
    }
}

/// Parametrized curve `t ↦ γ(t)` on `[t0, t1]`.
pub struct ParametricPath<'a> {
    pub point: &'a dyn Fn(f64) -> Vec<f64>,
    /// `γ'(t)`; a five-point difference is used when absent.
    pub velocity: Option<&'a dyn Fn(f64) -> Vec<f64>>,
    pub t0: f64,
    pub t1: f64,
}

/// A curve in ℝⁿ.
pub enum Path<'a> {
    Polyline(&'a [Vec<f64>]),
    Parametric(ParametricPath<'a>),
}

fn speed(p: &ParametricPath<'_>, t: f64) -> f64 {
    if let Some(v) = p.velocity {
        return norm(&v(t));
    }
    let h = 1e-4 * (p.t1 - p.t0).abs().max(f64::MIN_POSITIVE);
    let f = p.point;
    // (−f(t+2h) + 8f(t+h) − 8f(t−h) + f(t−2h)) / 12h
    let d = add(
        &sub(&scale(&f(t + h), 8.0), &f(t + 2.0 * h)),
        &sub(&f(t - 2.0 * h), &scale(&f(t - h), 8.0)),
    );
    norm(&d) / (12.0 * h)
}

/// `∫_γ w(z) |dz|` by adaptive Simpson: per segment for polylines, over
/// the parameter for parametric curves.
pub fn weighted_length<W>(path: &Path<'_>, w: W, rel_tol: f64, max_depth: u32) -> Result<f64>
where
    W: Fn(&[f64]) -> f64,
{
    match path {
        Path::Polyline(pts) => {
            if pts.len() < 2 {
                return Err(invalid("a path needs at least 2 samples"));
            }
            Ok(pts
                .windows(2)
                .map(|seg| {
                    let (a, b) = (&seg[0], &seg[1]);
                    let len = dist(a, b);
                    if len == 0.0 {
                        return 0.0;
                    }
                    let d = sub(b, a);
                    len * adaptive_simpson(|t| w(&axpy(a, t, &d)), 0.0, 1.0, rel_tol, max_depth)
                })
                .sum())
        }
        Path::Parametric(p) => {
            if !(p.t1 > p.t0) {
                return Err(invalid("parameter interval must satisfy t0 < t1"));
            }
            Ok(adaptive_simpson(
                |t| w(&(p.point)(t)) * speed(p, t),
                p.t0,
                p.t1,
                rel_tol,
                max_depth,
            ))
        }
    }
}

/// `k_α`-length `∫_γ |z|^{−α} |dz|` of a path avoiding the origin, for `α ∈ [0, 1]`.
pub fn path_length(alpha: f64, path: &Path<'_>, max_depth: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if let Path::Polyline(pts) = path {
        if pts.iter().any(|p| norm(p) < ORIGIN_EPS) {
            return Err(domain("path passes through the origin"));
        }
    }
    let hit_origin = Cell::new(false);
    let len = weighted_length(
        path,
        |z| {
            let nz = norm(z);
            if nz < ORIGIN_EPS {
                hit_origin.set(true);
                return 0.0;
            }
            if alpha == 0.0 {
                1.0
            } else {
                nz.powf(-alpha)
            }
        },
        DEFAULT_REL_TOL,
        max_depth,
    )?;
    if hit_origin.get() {
        return Err(domain("path passes through the origin"));
    }
    Ok(len)
}

/// [`path_length`] with the default refinement cap.
pub fn path_length_default(alpha: f64, path: &Path<'_>) -> Result<f64> {
    path_length(alpha, path, DEFAULT_MAX_DEPTH)
}

/// The five comparison quotients for `k_α`, in their nondecreasing order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport {
    pub values: [f64; 5],
    pub nondecreasing: bool,
}

/// Relative tolerance of [`ChainReport::nondecreasing`].
pub const CHAIN_TOL: f64 = 1e-10;

/// Evaluates
/// `(|x|^β−|y|^β)/(β(|x|−|y|))`, `k_α(x,y)/|x−y|`,
/// `k_α(−|x|,|y|)/(|x|+|y|)`, `(|x|^β+|y|^β)/(β(|x|+|y|))`, `2^α|x−y|^{−α}/β`.
///
/// The first quotient is `1/S_α(|x|,|y|)`, which also covers `|x| = |y|`.
pub fn inequality_chain_check(alpha: f64, x: &[f64], y: &[f64]) -> Result<ChainReport> {
    let beta = check_alpha(alpha)?;
    let (nx, ny) = nonzero(x, y)?;
    let d = dist(x, y);
    if d == 0.0 {
        return Err(invalid("the chain needs distinct points"));
    }
    let e1 = if alpha == 0.0 { 1.0 } else { 1.0 / s_quasimean(alpha, nx, ny) };
    let e2 = closed_form(beta, nx, ny, angle(x, y)) / d;
    let e3 = closed_form(beta, nx, ny, std::f64::consts::PI) / (nx + ny);
    let e4 = (nx.powf(beta) + ny.powf(beta)) / (beta * (nx + ny));
    let e5 = 2f64.powf(alpha) * d.powf(-alpha) / beta;
    let values = [e1, e2, e3, e4, e5];
    let nondecreasing = values.windows(2).all(|w| w[1] >= w[0] * (1.0 - CHAIN_TOL));
    Ok(ChainReport {
        values,
        nondecreasing,
    })
}
