//! Quasiconvexity constants of relative metrics.
//!
//! For an α-quasimean `M` the constant is
//! `c_M = sup_{x >= 0, y > 0} k_α(x, −y)/(x + y) · M(x, y)`, which is
//! finite exactly when `ρ_M` is quasiconvex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::optimize::{golden_max, grid_then_golden};
use crate::quadrature::{adaptive_simpson, DEFAULT_MAX_DEPTH, DEFAULT_REL_TOL};
use crate::quasihyperbolic::{closed_form, weighted_length, ParametricPath, Path};
use crate::relative_metric::{relative_quotient, rho_m};
use crate::vector::{angle, axpy, dist, dot, norm, random_point, scale, sub};
use crate::weight::{rel_close, WeightFunction};

/// `√(π²/4 + 4)`, the universal constant for weights `f(x) f(y)`.
pub fn ff_constant() -> f64 {
    (std::f64::consts::PI.powi(2) / 4.0 + 4.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Upper end of the magnitude search box.
    pub r_max: f64,
    /// Points of the 1-D log grid.
    pub grid_points: usize,
    /// Points per axis of the 2-D log grid.
    pub grid_points_2d: usize,
    /// Golden-section stopping width (in log-magnitude).
    pub refine_width: f64,
    /// Relative growth between the last two decades that signals divergence.
    pub divergence_growth: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            r_max: 1e8,
            grid_points: 2048,
            grid_points_2d: 257,
            refine_width: 1e-10,
            divergence_growth: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiconvexityEstimate {
    /// `+∞` when the search diverged.
    pub c_estimate: f64,
    /// Maximizing magnitude ratio; `+∞` when the supremum is the limit at infinity.
    pub argmax_r: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub converged: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(())
}

/// `k_α(x, −y)` for magnitudes `x >= 0`, `y > 0` on opposite rays.
pub fn k_opposite(alpha: f64, x: f64, y: f64) -> f64 {
    let beta = 1.0 - alpha;
    if beta == 0.0 {
        return if x == 0.0 {
            f64::INFINITY
        } else {
            std::f64::consts::PI.hypot(x.ln() - y.ln())
        };
    }
    if x == 0.0 {
        return y.powf(beta) / beta;
    }
    closed_form(beta, x, y, std::f64::consts::PI)
}

/// The quantity whose supremum is `c_M`.
pub fn objective(m: &WeightFunction, alpha: f64, x: f64, y: f64) -> f64 {
    k_opposite(alpha, x, y) / (x + y) * m.eval(x, y)
}

/// Maximum of `values[i]` over indices with `lo <= grid[i] <= hi`.
fn band_max(grid: &[f64], values: &[f64], lo: f64, hi: f64) -> f64 {
    grid.iter()
        .zip(values)
        .filter(|(r, _)| **r >= lo && **r <= hi)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `c_M` for α-homogeneous `M` with `M(1, 1) = 1`, as a supremum over `r >= 1`.
///
/// For `α < 1` the objective tends to `M(1, 0)/β` as `r → ∞`, which joins
/// the candidate set. For `α = 1` it diverges when `M(1, 0) > 0`; otherwise
/// growth over the last decade of the box decides.
pub fn c_m_homogeneous(m: &WeightFunction, alpha: f64, cfg: &SearchConfig) -> Result<QuasiconvexityEstimate> {
    check_alpha(alpha)?;
    let m11 = m.eval(1.0, 1.0);
    if (m11 - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("weight must satisfy M(1,1) = 1, got {m11}")));
    }
    if let Some(h) = m.homogeneity_degree() {
        if !rel_close(h, alpha, 1e-12) {
            return Err(invalid(format!("weight is {h}-homogeneous, not {alpha}-homogeneous")));
        }
    }
    let beta = 1.0 - alpha;
    let h = |s: f64| objective(m, alpha, s.exp(), 1.0);
    let logs: Vec<f64> = (0..cfg.grid_points)
        .map(|i| cfg.r_max.ln() * i as f64 / (cfg.grid_points - 1) as f64)
        .collect();
    let (s_best, v_best) = grid_then_golden(h, &logs, cfg.refine_width);
    let at_one = h(0.0);
    let m10 = m.eval(1.0, 0.0);

    if alpha == 1.0 {
        let values: Vec<f64> = logs.iter().map(|&s| h(s)).collect();
        let rs: Vec<f64> = logs.iter().map(|s| s.exp()).collect();
        let last = band_max(&rs, &values, cfg.r_max / 10.0, cfg.r_max);
        let prev = band_max(&rs, &values, cfg.r_max / 100.0, cfg.r_max / 10.0);
        let diverged = m10 > 0.0 || last > prev * (1.0 + cfg.divergence_growth);
        return Ok(if diverged {
            QuasiconvexityEstimate {
                c_estimate: f64::INFINITY,
                argmax_r: f64::INFINITY,
                lower_bound: v_best,
                upper_bound: f64::INFINITY,
                converged: false,
            }
        } else {
            QuasiconvexityEstimate {
                c_estimate: v_best,
                argmax_r: s_best.exp(),
                lower_bound: at_one,
                upper_bound: f64::INFINITY,
                converged: true,
            }
        });
    }

    let limit = m10 / beta;
    let (c_estimate, argmax_r) = if limit >= v_best {
        (limit, f64::INFINITY)
    } else {
        (v_best, s_best.exp())
    };
    Ok(QuasiconvexityEstimate {
        c_estimate,
        argmax_r,
        lower_bound: limit.max(at_one),
        upper_bound: 2f64.powf(alpha) / beta,
        converged: true,
    })
}

/// `c_M` for a general α-quasimean by a 2-D log-grid search over `(x, y)`
/// followed by alternating golden-section refinement along each axis.
///
/// For `α < 1` the objective is bounded by `2/β` and the search always
/// converges. For `α = 1` growth along the outer decade of the box is
/// reported as divergence.
pub fn c_m_estimate(m: &WeightFunction, alpha: f64, cfg: &SearchConfig) -> Result<QuasiconvexityEstimate> {
    check_alpha(alpha)?;
    let beta = 1.0 - alpha;
    let n = cfg.grid_points_2d.max(3);
    let l = cfg.r_max.ln();
    let logs: Vec<f64> = (0..n).map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64).collect();
    let f = |sx: f64, sy: f64| objective(m, alpha, sx.exp(), sy.exp());

    // Rows in parallel; `None` in the x slot stands for x = 0.
    let rows: Vec<(f64, f64, f64)> = logs
        .par_iter()
        .map(|&sy| {
            let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY, sy);
            let zero = objective(m, alpha, 0.0, sy.exp());
            if zero > best.0 {
                best = (zero, f64::NEG_INFINITY, sy);
            }
            for &sx in &logs {
                let v = f(sx, sy);
                if v > best.0 {
                    best = (v, sx, sy);
                }
            }
            best
        })
        .collect();
    let (mut v, mut sx, mut sy) = rows
        .iter()
        .copied()
        .fold((f64::NEG_INFINITY, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });

    let step = 2.0 * l / (n - 1) as f64;
    if sx.is_finite() {
        for _ in 0..4 {
            let (nx, vx) = golden_max(|s| f(s, sy), sx - step, sx + step, cfg.refine_width);
            if vx > v {
                (sx, v) = (nx, vx);
            }
            let (ny, vy) = golden_max(|s| f(sx, s), sy - step, sy + step, cfg.refine_width);
            if vy > v {
                (sy, v) = (ny, vy);
            }
        }
    }
    let argmax_r = if sx.is_finite() { (sx - sy).exp().max((sy - sx).exp()) } else { f64::INFINITY };

    let upper = if alpha == 1.0 {
        f64::INFINITY
    } else if m.homogeneity_degree().is_some_and(|h| rel_close(h, alpha, 1e-12)) && rel_close(m.eval(1.0, 1.0), 1.0, 1e-9) {
        2f64.powf(alpha) / beta
    } else {
        2.0 / beta
    };

    if alpha == 1.0 {
        // Max over points whose larger magnitude lies in each of the last two decades.
        let outer = |lo: f64, hi: f64| -> f64 {
            logs.par_iter()
                .map(|&sy| {
                    logs.iter()
                        .filter(|&&sx| {
                            let t = sx.max(sy);
                            t >= lo && t <= hi
                        })
                        .map(|&sx| f(sx, sy))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .reduce(|| f64::NEG_INFINITY, f64::max)
        };
        let last = outer(l - std::f64::consts::LN_10, l);
        let prev = outer(l - 2.0 * std::f64::consts::LN_10, l - std::f64::consts::LN_10);
        if last > prev * (1.0 + cfg.divergence_growth) {
            return Ok(QuasiconvexityEstimate {
                c_estimate: f64::INFINITY,
                argmax_r: f64::INFINITY,
                lower_bound: v,
                upper_bound: f64::INFINITY,
                converged: false,
            });
        }
    }
    Ok(QuasiconvexityEstimate {
        c_estimate: v,
        argmax_r,
        lower_bound: v,
        upper_bound: upper,
        converged: true,
    })
}

/// `(2^{−q/p}/(1−q), max{2^{q(1−1/p)}, 1}/(1−q))`, the bracket for the
/// quasiconvexity constant of `ρ_{p,q}` with `0 < q < 1`.
pub fn c_pq_bounds(p: f64, q: f64) -> (f64, f64) {
    let lower = 2f64.powf(-q / p) / (1.0 - q);
    let upper = 2f64.powf(q * (1.0 - 1.0 / p)).max(1.0) / (1.0 - q);
    (lower, upper)
}

/// Length of the shorter of the two radial/circular composite paths for
/// `∫ |dz| / m(|z|)`, where `m(t) = M(t, t)`. `nx >= ny`.
fn radial_circular_length<F>(m_diag: F, nx: f64, ny: f64, theta: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let radial = adaptive_simpson(|t| 1.0 / m_diag(t), ny, nx, DEFAULT_REL_TOL, DEFAULT_MAX_DEPTH);
    if ny == 0.0 {
        return radial;
    }
    radial + theta * (ny / m_diag(ny)).min(nx / m_diag(nx))
}

/// For `M(x, y) = f(x) f(y)` with `f(0) > 0`: the length of the better of
/// the two radial/circular paths from `x` to `y`, and its ratio to `ρ_M(x, y)`.
pub fn ff_path_length_bound<F>(f: F, x: &[f64], y: &[f64]) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let f0 = f(0.0);
    if !(f0 > 0.0) {
        return Err(invalid(format!("f(0) must be positive, got {f0}")));
    }
    let (x, y) = if norm(x) >= norm(y) { (x, y) } else { (y, x) };
    let (nx, ny) = (norm(x), norm(y));
    let d = dist(x, y);
    if d == 0.0 {
        return Err(invalid("points must be distinct"));
    }
    let theta = if ny == 0.0 { 0.0 } else { angle(x, y) };
    let len = radial_circular_length(|t| f(t) * f(t), nx, ny, theta);
    let rho = d / (f(nx) * f(ny));
    Ok((len, len / rho))
}

fn invert(x: &[f64]) -> Vec<f64> {
    scale(x, 1.0 / dot(x, x))
}

/// For `M(x, y) = c x y`: the `ρ_M`-length of the image under `z ↦ z/|z|²`
/// of the segment between the images of `x` and `y`, by quadrature, and its
/// ratio to `ρ_M(x, y)`.
pub fn inverted_segment_length(c: f64, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if !(c > 0.0) {
        return Err(invalid("c must be positive"));
    }
    if norm(x) == 0.0 || norm(y) == 0.0 {
        return Err(invalid("points must be nonzero"));
    }
    let (xi, yi) = (invert(x), invert(y));
    let d = sub(&yi, &xi);
    if norm(&d) == 0.0 {
        return Err(invalid("points must be distinct"));
    }
    // The segment must stay clear of the origin, or its image passes through ∞.
    let t_star = (-dot(&xi, &d) / dot(&d, &d)).clamp(0.0, 1.0);
    if norm(&axpy(&xi, t_star, &d)) < 1e-9 * norm(&xi).max(norm(&yi)) {
        return Err(invalid("the inverted segment passes through the origin"));
    }
    let point = |t: f64| invert(&axpy(&xi, t, &d));
    let velocity = |t: f64| {
        let u = axpy(&xi, t, &d);
        let uu = dot(&u, &u);
        let v = axpy(&d, -2.0 * dot(&u, &d) / uu, &u);
        scale(&v, 1.0 / uu)
    };
    let path = Path::Parametric(ParametricPath {
        point: &point,
        velocity: Some(&velocity),
        t0: 0.0,
        t1: 1.0,
    });
    let len = weighted_length(&path, |z| 1.0 / (c * dot(z, z)), DEFAULT_REL_TOL, DEFAULT_MAX_DEPTH)?;
    let rho = dist(x, y) / (c * norm(x) * norm(y));
    Ok((len, len / rho))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    /// Every sampled pair was joined by a constructed path of length `ρ_M` (within 1e−6).
    pub one_quasiconvex: bool,
    /// Largest `best_length/ρ_M − 1` over the samples.
    pub worst_excess: f64,
    /// Pair attaining `worst_excess`.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

/// Tolerance for calling a constructed path optimal.
pub const ONE_QC_TOL: f64 = 1e-6;

/// Best `ℓ_M` over constructed candidate paths: the segment, the inversion
/// image of the segment between inverted endpoints, the two
/// radial/circular composites and the radial path through ∞. `ℓ_M(γ) = ∫_γ |dz| / M(|z|, |z|)`.
fn best_constructed_length(m: &WeightFunction, x: &[f64], y: &[f64]) -> f64 {
    let w = |z: &[f64]| {
        let t = norm(z);
        1.0 / m.eval(t, t)
    };
    let mut best = f64::INFINITY;
    // A segment through the origin has infinite length when M(0, 0) = 0.
    let dxy = sub(y, x);
    let t0 = (-dot(x, &dxy) / dot(&dxy, &dxy)).clamp(0.0, 1.0);
    let clears_origin = norm(&axpy(x, t0, &dxy)) > 1e-6 * norm(x).max(norm(y));
    if clears_origin || m.eval(0.0, 0.0) > 0.0 {
        let seg = [x.to_vec(), y.to_vec()];
        if let Ok(v) = weighted_length(&Path::Polyline(&seg), w, DEFAULT_REL_TOL, DEFAULT_MAX_DEPTH) {
            if v.is_finite() {
                best = best.min(v);
            }
        }
    }
    let (xi, yi) = (invert(x), invert(y));
    let d = sub(&yi, &xi);
    let t_star = (-dot(&xi, &d) / dot(&d, &d)).clamp(0.0, 1.0);
    if norm(&axpy(&xi, t_star, &d)) > 1e-6 * norm(&xi).max(norm(&yi)) {
        let point = |t: f64| invert(&axpy(&xi, t, &d));
        let velocity = |t: f64| {
            let u = axpy(&xi, t, &d);
            let uu = dot(&u, &u);
            scale(&axpy(&d, -2.0 * dot(&u, &d) / uu, &u), 1.0 / uu)
        };
        let path = Path::Parametric(ParametricPath {
            point: &point,
            velocity: Some(&velocity),
            t0: 0.0,
            t1: 1.0,
        });
        if let Ok(v) = weighted_length(&path, w, DEFAULT_REL_TOL, DEFAULT_MAX_DEPTH) {
            if v.is_finite() {
                best = best.min(v);
            }
        }
    }
    let (nx, ny) = (norm(x), norm(y));
    let (hi, lo) = if nx >= ny { (nx, ny) } else { (ny, nx) };
    if lo > 0.0 {
        let v = radial_circular_length(|t| m.eval(t, t), hi, lo, angle(x, y));
        if v.is_finite() {
            best = best.min(v);
        }
        // Out to ∞ along the ray of x and back along the ray of y; with
        // t = 1/u each leg is ∫_0^{1/|z|} du / (u² M(1/u, 1/u)).
        let g = |u: f64| {
            let t = 1.0 / u;
            1.0 / (u * u * m.eval(t, t))
        };
        if g(1e-150) < 1e100 {
            let leg = |r: f64| adaptive_simpson(|u| if u == 0.0 { g(1e-150) } else { g(u) }, 0.0, 1.0 / r, DEFAULT_REL_TOL, DEFAULT_MAX_DEPTH);
            let v = leg(nx) + leg(ny);
            if v.is_finite() {
                best = best.min(v);
            }
        }
    }
    best
}

/// Samples pairs in the plane (half of them on opposite rays) and compares
/// the best constructed path against `ρ_M`.
pub fn one_quasiconvex_classification_test(
    m: &WeightFunction,
    samples: usize,
    seed: u64,
) -> ClassificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..samples.max(1))
        .map(|i| {
            let x = random_point(&mut rng, 2, 0.1, 10.0);
            let y = if i % 2 == 0 {
                scale(&x, -rng.random_range(0.1..10.0) / norm(&x))
            } else {
                random_point(&mut rng, 2, 0.1, 10.0)
            };
            (x, y)
        })
        .collect();
    let excess: Vec<f64> = pairs
        .par_iter()
        .map(|(x, y)| {
            let rho = rho_m(m, x, y);
            relative_quotient(best_constructed_length(m, x, y), rho) - 1.0
        })
        .collect();
    let (i, worst) = excess
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, &e)| if e > a.1 { (i, e) } else { a });
    ClassificationReport {
        one_quasiconvex: worst <= ONE_QC_TOL,
        worst_excess: worst,
        witness: Some(pairs[i].clone()),
    }
}
