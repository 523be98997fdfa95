//! Adaptive Simpson integration.

/// Relative tolerance used throughout the crate.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Recursion cap.
pub const DEFAULT_MAX_DEPTH: u32 = 40;

/// `∫_a^b f` to relative tolerance `rel_tol`, bisecting at most `max_depth` times.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64, max_depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Seed the absolute tolerance from a 5-point estimate so that a lucky
    // 3-point value near zero cannot stall the recursion.
    let (fl, fr) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
    let rough = (b - a) / 12.0 * (fa + 4.0 * fl + 2.0 * fm + 4.0 * fr + fb);
    let eps = rel_tol * rough.abs().max(whole.abs()).max(f64::MIN_POSITIVE);
    recurse(&f, a, b, fa, fm, fb, whole, eps, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}
