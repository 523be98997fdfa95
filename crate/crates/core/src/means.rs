//! Power means `A_p`, the quasimeans `S_p`, the logarithmic mean, and the
//! grid predicates used by the metricity criteria.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid::SampleGrid;
use crate::weight::WeightFunction;

/// Relative slack for the grid predicates.
const GRID_TOL: f64 = 1e-12;

/// Below this relative gap `S_p` and `L` use their diagonal expansion.
const NEAR_DIAGONAL: f64 = 1e-8;

#[inline]
fn ordered(x: f64, y: f64) -> (f64, f64) {
    if x >= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Power mean `A_p(x, y)` for `p ∈ [−∞, ∞]`.
///
/// `p = −∞, 0, ∞` are the min, geometric mean and max. For `p < 0` a zero
/// argument gives 0.
pub fn power_mean(p: f64, x: f64, y: f64) -> f64 {
    let (hi, lo) = ordered(x, y);
    if p == f64::NEG_INFINITY {
        return lo;
    }
    if p == f64::INFINITY {
        return hi;
    }
    if hi == lo {
        return hi;
    }
    if p == 0.0 {
        return hi.sqrt() * lo.sqrt();
    }
    if p > 0.0 {
        hi * ((1.0 + (lo / hi).powf(p)) * 0.5).powf(1.0 / p)
    } else {
        if lo == 0.0 {
            return 0.0;
        }
        lo * ((1.0 + (hi / lo).powf(p)) * 0.5).powf(1.0 / p)
    }
}

/// The quasimean `S_p(x, y) = (1−p)(x−y)/(x^{1−p} − y^{1−p})`, `0 < p <= 1`,
/// with `S_p(x, x) = x^p` and `S_1 = L` the logarithmic mean.
///
/// Returns NaN for `p` outside (0, 1].
pub fn s_quasimean(p: f64, x: f64, y: f64) -> f64 {
    if !(p > 0.0 && p <= 1.0) {
        return f64::NAN;
    }
    let (hi, lo) = ordered(x, y);
    if hi == lo {
        return hi.powf(p);
    }
    let a = 1.0 - p;
    if lo == 0.0 {
        return if a > 0.0 { a * hi.powf(p) } else { 0.0 };
    }
    if hi - lo < NEAR_DIAGONAL * hi {
        // Expansion about the midpoint m with e = (x−y)/(x+y):
        // S_p = m^p / (1 + (a−1)(a−2)e²/6 + O(e⁴)).
        let m = 0.5 * (hi + lo);
        let e = (hi - lo) / (hi + lo);
        return m.powf(p) / (1.0 + (a - 1.0) * (a - 2.0) * e * e / 6.0);
    }
    let u = (hi / lo).ln();
    if u > 700.0 {
        return a * (hi - lo) / (hi.powf(a) - lo.powf(a));
    }
    if a == 0.0 {
        lo * u.exp_m1() / u
    } else {
        lo.powf(p) * a * u.exp_m1() / (a * u).exp_m1()
    }
}

/// Logarithmic mean `L(x, y) = (x−y)/(log x − log y)`.
pub fn log_mean(x: f64, y: f64) -> f64 {
    s_quasimean(1.0, x, y)
}

/// The trace `t_M(x) = M(x, 1)` for `x >= 1`.
pub fn trace(m: &WeightFunction, x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(invalid(format!("trace is defined for x >= 1, got {x}")));
    }
    Ok(m.eval(x, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeanFamily {
    PowerMean,
    SQuasimean,
    LogMean,
    Custom,
}

/// A mean or quasimean together with its declared exponent α.
#[derive(Debug, Clone)]
pub struct MeanSpec {
    family: MeanFamily,
    parameter: f64,
    exponent: f64,
    custom: Option<WeightFunction>,
}

impl MeanSpec {
    pub fn power(p: f64) -> Result<Self> {
        if p.is_nan() {
            return Err(invalid("power-mean parameter is NaN"));
        }
        Ok(Self {
            family: MeanFamily::PowerMean,
            parameter: p,
            exponent: 1.0,
            custom: None,
        })
    }

    pub fn s(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(invalid(format!("S_p needs 0 < p <= 1, got {p}")));
        }
        Ok(Self {
            family: MeanFamily::SQuasimean,
            parameter: p,
            exponent: p,
            custom: None,
        })
    }

    pub fn log() -> Self {
        Self {
            family: MeanFamily::LogMean,
            parameter: 1.0,
            exponent: 1.0,
            custom: None,
        }
    }

    pub fn custom(m: WeightFunction, exponent: f64) -> Self {
        Self {
            family: MeanFamily::Custom,
            parameter: f64::NAN,
            exponent,
            custom: Some(m),
        }
    }

    pub fn family(&self) -> MeanFamily {
        self.family
    }

    pub fn parameter(&self) -> f64 {
        self.parameter
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self.family {
            MeanFamily::PowerMean => power_mean(self.parameter, x, y),
            MeanFamily::SQuasimean => s_quasimean(self.parameter, x, y),
            MeanFamily::LogMean => log_mean(x, y),
            MeanFamily::Custom => self.custom.as_ref().expect("custom weight").eval(x, y),
        }
    }

    pub fn to_weight(&self) -> WeightFunction {
        match self.family {
            MeanFamily::PowerMean => WeightFunction::power_mean(self.parameter),
            MeanFamily::SQuasimean => WeightFunction::s_quasimean(self.parameter),
            MeanFamily::LogMean => WeightFunction::s_quasimean(1.0),
            MeanFamily::Custom => self.custom.clone().expect("custom weight"),
        }
    }
}

/// Which half of the moderation condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModerationFailure {
    /// `M(·, y)` decreased between `t0` and `t1`.
    Decreasing,
    /// `M(t, y)/t` increased between `t0` and `t1`.
    RatioIncreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModerationWitness {
    pub fixed: f64,
    pub t0: f64,
    pub t1: f64,
    pub failure: ModerationFailure,
}

/// Pair `(x, y)` at which `M` leaves the band `[min{x^α,y^α}, max{x^α,y^α}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasimeanWitness {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Outcome of a grid predicate: a verdict plus the first failing sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridVerdict<W> {
    pub holds: bool,
    pub witness: Option<W>,
}

impl<W> GridVerdict<W> {
    fn from_witness(witness: Option<W>) -> Self {
        Self {
            holds: witness.is_none(),
            witness,
        }
    }
}

fn moderation_along<F>(ts: &[f64], fixed: f64, f: F) -> Option<ModerationWitness>
where
    F: Fn(f64) -> f64,
{
    let mut prev = f(ts[0]);
    for w in ts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let cur = f(t1);
        let fail = |failure| {
            Some(ModerationWitness {
                fixed,
                t0,
                t1,
                failure,
            })
        };
        if cur.is_nan() || cur < prev - GRID_TOL * prev.abs() {
            return fail(ModerationFailure::Decreasing);
        }
        if cur / t1 > (prev / t0) * (1.0 + GRID_TOL) {
            return fail(ModerationFailure::RatioIncreasing);
        }
        prev = cur;
    }
    None
}

/// Grid test of the moderately-increasing property: each partial map
/// `t ↦ M(t, y)` is nondecreasing with `M(t, y)/t` nonincreasing.
///
/// Rows are checked in parallel; the reported witness is the one with the
/// lowest fixed-argument index.
pub fn is_moderately_increasing(
    m: &WeightFunction,
    grid: &SampleGrid,
) -> Result<GridVerdict<ModerationWitness>> {
    if !grid.is_positive() {
        return Err(invalid("moderation grid must be strictly positive"));
    }
    let ts = grid.points();
    let witness = ts.par_iter().find_map_first(|&y| {
        moderation_along(ts, y, |t| m.eval(t, y))
            .or_else(|| moderation_along(ts, y, |t| m.eval(y, t)))
    });
    Ok(GridVerdict::from_witness(witness))
}

/// Scalar version: `f` nondecreasing with `f(t)/t` nonincreasing on the
/// positive part of the grid.
pub fn is_moderately_increasing_scalar<F>(f: F, grid: &SampleGrid) -> GridVerdict<ModerationWitness>
where
    F: Fn(f64) -> f64,
{
    let ts: Vec<f64> = grid.points().iter().copied().filter(|&t| t > 0.0).collect();
    if ts.len() < 2 {
        return GridVerdict::from_witness(None);
    }
    GridVerdict::from_witness(moderation_along(&ts, f64::NAN, f))
}

/// Grid test of the α-quasimean band `min{x^α,y^α} <= M(x,y) <= max{x^α,y^α}`.
pub fn quasimean_exponent_check(
    m: &WeightFunction,
    alpha: f64,
    grid: &SampleGrid,
) -> Result<GridVerdict<QuasimeanWitness>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("quasimean exponent must lie in (0, 1], got {alpha}")));
    }
    let pts = grid.points();
    let witness = pts.par_iter().find_map_first(|&x| {
        pts.iter().find_map(|&y| {
            let (a, b) = (x.powf(alpha), y.powf(alpha));
            let value = m.eval(x, y);
            let lo = a.min(b);
            let hi = a.max(b);
            let inside = value >= lo * (1.0 - GRID_TOL) && value <= hi * (1.0 + GRID_TOL);
            (!inside).then_some(QuasimeanWitness { x, y, value })
        })
    });
    Ok(GridVerdict::from_witness(witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn power_mean_special_cases() {
        assert_eq!(power_mean(f64::NEG_INFINITY, 2.0, 3.0), 2.0);
        assert_eq!(power_mean(f64::INFINITY, 2.0, 3.0), 3.0);
        assert_eq!(power_mean(0.0, 4.0, 9.0), 6.0);
        assert!((power_mean(2.0, 1.0, 7.0) - 5.0).abs() < 1e-14);
        assert_eq!(power_mean(-1.0, 0.0, 5.0), 0.0);
        assert_eq!(power_mean(1.0, 0.0, 0.0), 0.0);
        for p in [-7.0, -1.0, 0.0, 0.5, 1.0, 3.0, f64::INFINITY, f64::NEG_INFINITY] {
            assert_eq!(power_mean(p, 2.5, 2.5), 2.5);
        }
        // Harmonic mean.
        assert!((power_mean(-1.0, 1.0, 3.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn power_mean_large_exponents_do_not_overflow() {
        let v = power_mean(800.0, 1e3, 1e2);
        assert!((v - 1e3 * 0.5_f64.powf(1.0 / 800.0)).abs() < 1e-9);
        let v = power_mean(-800.0, 1e3, 1e2);
        assert!((v - 1e2 * 0.5_f64.powf(-1.0 / 800.0)).abs() < 1e-9);
    }

    #[test]
    fn s_quasimean_examples() {
        assert!((s_quasimean(0.5, 4.0, 1.0) - 1.5).abs() < 1e-15);
        assert!((s_quasimean(1.0, std::f64::consts::E, 1.0) - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        for p in [0.1, 0.5, 1.0] {
            assert_eq!(s_quasimean(p, 3.0, 3.0), 3.0_f64.powf(p));
        }
        assert!(s_quasimean(0.0, 1.0, 2.0).is_nan());
        assert!(s_quasimean(1.5, 1.0, 2.0).is_nan());
    }

    #[test]
    fn s_quasimean_zero_argument_is_the_limit() {
        assert!((s_quasimean(0.25, 16.0, 0.0) - 0.75 * 2.0).abs() < 1e-15);
        assert_eq!(s_quasimean(1.0, 16.0, 0.0), 0.0);
        assert_eq!(s_quasimean(0.5, 0.0, 0.0), 0.0);
        // Continuity from the positive side.
        let near = s_quasimean(0.25, 16.0, 1e-300);
        assert!((near - 1.5).abs() < 1e-12);
    }

    #[test]
    fn near_diagonal_branch_is_continuous() {
        for p in [0.2, 0.5, 0.9, 1.0] {
            let x = 2.0;
            let inside = s_quasimean(p, x * (1.0 + 0.99e-8), x);
            let outside = s_quasimean(p, x * (1.0 + 1.01e-8), x);
            // S_p(x(1+ε), x) ≈ x^p (1 + pε/2), so the step is p x^p 1e-10.
            let step = p * x.powf(p) * 1e-10;
            assert!(((outside - inside) - step).abs() < 1e-14, "p={p}: {inside} vs {outside}");
            assert!((inside - x.powf(p)).abs() < 1e-7);
        }
    }

    #[test]
    fn log_mean_matches_integral_representation() {
        // L(x, y) = (x − y)/∫_y^x dt/t, check against composite Simpson on the integral.
        let (x, y) = (7.5_f64, 0.3_f64);
        let n = 20_000;
        let h = (x - y) / n as f64;
        let mut s = 1.0 / y + 1.0 / x;
        for i in 1..n {
            let t = y + h * i as f64;
            s += if i % 2 == 1 { 4.0 / t } else { 2.0 / t };
        }
        let integral = s * h / 3.0;
        assert!((log_mean(x, y) - (x - y) / integral).abs() < 1e-9);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&WeightFunction::power_mean(1.0), 1.0).unwrap(), 1.0);
        assert!((trace(&WeightFunction::power_mean(2.0), 7.0).unwrap() - 5.0).abs() < 1e-14);
        assert_eq!(trace(&WeightFunction::max(), 3.0).unwrap(), 3.0);
        assert!(trace(&WeightFunction::max(), 0.5).is_err());
    }

    #[test]
    fn moderation_examples() {
        let grid = SampleGrid::default_positive();
        assert!(is_moderately_increasing(&WeightFunction::sum(), &grid).unwrap().holds);
        assert!(is_moderately_increasing(&WeightFunction::power_mean(1.0), &grid).unwrap().holds);

        let sq = WeightFunction::from_expression("x^2*y^2").unwrap();
        let v = is_moderately_increasing(&sq, &grid).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!(w.failure, ModerationFailure::RatioIncreasing);
        let ratio = |t: f64| sq.eval(t, w.fixed) / t;
        assert!(ratio(w.t1) > ratio(w.t0));

        assert!(is_moderately_increasing(&sq, &SampleGrid::new(vec![0.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn quasimean_examples() {
        let grid = SampleGrid::log_spaced(1e-3, 1e3, 64).unwrap();
        let geo = WeightFunction::from_expression("sqrt(x*y)").unwrap();
        assert!(quasimean_exponent_check(&WeightFunction::power_mean(1.0), 1.0, &grid).unwrap().holds);
        assert!(quasimean_exponent_check(&geo, 1.0, &grid).unwrap().holds);

        let with_one = SampleGrid::new(vec![1.0, 2.0]).unwrap();
        let v = quasimean_exponent_check(&WeightFunction::sum(), 1.0, &with_one).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!((w.x, w.y, w.value), (1.0, 1.0, 2.0));

        assert!(quasimean_exponent_check(&geo, 0.0, &grid).is_err());
        assert!(quasimean_exponent_check(&geo, 1.5, &grid).is_err());
    }

    fn positive() -> impl Strategy<Value = f64> {
        (-6.0f64..6.0).prop_map(|e| 10f64.powf(e))
    }

    proptest! {
        #[test]
        fn builtin_means_are_exactly_symmetric(x in positive(), y in positive(), p in -8.0f64..8.0, s in 0.01f64..1.0) {
            prop_assert_eq!(power_mean(p, x, y), power_mean(p, y, x));
            prop_assert_eq!(s_quasimean(s, x, y), s_quasimean(s, y, x));
            prop_assert_eq!(log_mean(x, y), log_mean(y, x));
        }

        #[test]
        fn power_mean_is_monotone_in_p(x in positive(), y in positive(), p1 in -20.0f64..20.0, dp in 0.0f64..20.0) {
            let p2 = p1 + dp;
            let (a, b) = (power_mean(p1, x, y), power_mean(p2, x, y));
            prop_assert!(a <= b * (1.0 + 1e-12), "A_{} = {} > A_{} = {}", p1, a, p2, b);
            prop_assert!(power_mean(f64::NEG_INFINITY, x, y) <= a);
            prop_assert!(b <= power_mean(f64::INFINITY, x, y));
        }

        #[test]
        fn power_mean_bounded_by_scaled_arithmetic_mean(x in positive(), y in positive(), p in 0.05f64..30.0) {
            let bound = 2f64.powf(1.0 - 1.0 / p).max(1.0) * power_mean(1.0, x, y);
            prop_assert!(power_mean(p, x, y) <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn s_p_is_a_p_quasimean(x in positive(), y in positive(), p in 0.01f64..=1.0) {
            let v = s_quasimean(p, x, y);
            let (a, b) = (x.powf(p), y.powf(p));
            prop_assert!(v >= a.min(b) * (1.0 - 1e-12));
            prop_assert!(v <= a.max(b) * (1.0 + 1e-12));
        }
    }
}
