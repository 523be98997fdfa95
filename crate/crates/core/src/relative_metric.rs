//! The M-relative distance `ρ_M(x, y) = ‖x − y‖ / M(‖x‖, ‖y‖)` and the
//! metricity tests built around it.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fuzz::{triangle_fuzz, FuzzReport};
use crate::grid::SampleGrid;
use crate::means::{quasimean_exponent_check, s_quasimean, GridVerdict};
use crate::vector::{dist, log_uniform, norm, random_point};
use crate::weight::{pq_weight, WeightFunction};

/// Magnitude range of the random points used by the fuzzers.
pub const FUZZ_MAGNITUDES: (f64, f64) = (1e-3, 1e3);

const CRITERION_TOL: f64 = 1e-12;

/// `num / den` with `0/0 = 0` and `num/0 = +∞`.
#[inline]
pub(crate) fn relative_quotient(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// `ρ_M(x, y)`; `+∞` when the weight vanishes at distinct points.
pub fn rho_m(m: &WeightFunction, x: &[f64], y: &[f64]) -> f64 {
    let num = dist(x, y);
    if num == 0.0 {
        return 0.0;
    }
    relative_quotient(num, m.eval(norm(x), norm(y)))
}

/// The (p,q)-relative distance `‖x−y‖ / (‖x‖^p + ‖y‖^p)^{q/p}`.
pub fn rho_pq(p: f64, q: f64, x: &[f64], y: &[f64]) -> f64 {
    let num = dist(x, y);
    if num == 0.0 {
        return 0.0;
    }
    relative_quotient(num, pq_weight(p, q, norm(x), norm(y)))
}

/// Whether `ρ_{p,q}` is a metric: `q = 0`, or `0 < q <= 1` and
/// `p >= max{1 − q, (2 − q)/3}`. `p = ∞` is accepted.
pub fn pq_is_metric(p: f64, q: f64) -> bool {
    if q == 0.0 {
        return true;
    }
    q > 0.0 && q <= 1.0 && p >= (1.0 - q).max((2.0 - q) / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CriterionOutcome {
    /// `x ↦ M(x,1)/S_α(x,1)` is nondecreasing on the grid.
    SufficientHolds,
    /// `M(x,1) < S_α(x,1)` at `x`: `ρ_M` is not a metric.
    NecessaryFails { x: f64, m: f64, s: f64 },
    /// The ratio decreases between `x0` and `x1` but the necessary bound holds.
    Inconclusive { x0: f64, x1: f64 },
}

/// Metricity criterion for α-quasimeans, evaluated on `grid ⊂ [1, ∞)`.
///
/// The weight must pass the α-quasimean band check on the same grid.
pub fn metric_criterion_quasimean(
    m: &WeightFunction,
    alpha: f64,
    grid: &SampleGrid,
) -> Result<CriterionOutcome> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let xs = grid.points();
    if xs[0] < 1.0 {
        return Err(invalid("criterion grid must lie in [1, ∞)"));
    }
    if let Some(w) = quasimean_exponent_check(m, alpha, grid)?.witness {
        return Err(invalid(format!(
            "'{}' is not an {alpha}-quasimean: M({}, {}) = {}",
            m.label(),
            w.x,
            w.y,
            w.value
        )));
    }
    let traces: Vec<(f64, f64, f64)> = xs
        .iter()
        .map(|&x| (x, m.eval(x, 1.0), s_quasimean(alpha, x, 1.0)))
        .collect();
    if let Some(&(x, mv, s)) = traces
        .iter()
        .find(|(_, mv, s)| *mv < s * (1.0 - CRITERION_TOL))
    {
        return Ok(CriterionOutcome::NecessaryFails { x, m: mv, s });
    }
    for w in traces.windows(2) {
        let (x0, m0, s0) = w[0];
        let (x1, m1, s1) = w[1];
        if m1 / s1 < (m0 / s0) * (1.0 - CRITERION_TOL) {
            return Ok(CriterionOutcome::Inconclusive { x0, x1 });
        }
    }
    Ok(CriterionOutcome::SufficientHolds)
}

/// Signed real with log-uniform magnitude in [1e-3, 1e3].
fn signed_sample(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let r = log_uniform(rng, FUZZ_MAGNITUDES.0, FUZZ_MAGNITUDES.1);
    vec![if rng.random::<bool>() { r } else { -r }]
}

/// Triangle campaign for `ρ_M` on the real line.
pub fn metric_on_line_fuzz(m: &WeightFunction, n_samples: usize, seed: u64) -> Result<FuzzReport> {
    if n_samples == 0 {
        return Err(invalid("n_samples must be at least 1"));
    }
    Ok(triangle_fuzz(
        |x: &[f64], y: &[f64]| rho_m(m, x, y),
        signed_sample,
        n_samples,
        seed,
    ))
}

/// Triangle campaign for an arbitrary descriptor in its own dimension, with
/// log-uniform magnitudes and uniform directions.
pub fn metric_fuzz(d: &MetricDescriptor, n_samples: usize, seed: u64) -> Result<FuzzReport> {
    if n_samples == 0 {
        return Err(invalid("n_samples must be at least 1"));
    }
    let n = d.dimension();
    let sampler = move |rng: &mut ChaCha8Rng| {
        if n == 1 {
            signed_sample(rng)
        } else {
            random_point(rng, n, FUZZ_MAGNITUDES.0, FUZZ_MAGNITUDES.1)
        }
    };
    Ok(triangle_fuzz(|x: &[f64], y: &[f64]| d.distance(x, y), sampler, n_samples, seed))
}

/// Excess of the Ptolemy inequality at a quadruple; 0 when it holds.
pub fn ptolemy_check(x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
    let lhs = dist(z, w) * dist(x, y);
    let rhs = dist(y, w) * dist(x, z) + dist(x, w) * dist(z, y);
    (lhs - rhs).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ProductWeightWitness {
    Decreasing { t0: f64, t1: f64 },
    RatioIncreasing { t0: f64, t1: f64 },
    NotConvex { t0: f64, t1: f64, t2: f64 },
}

/// Grid test that `f` is moderately increasing and convex, i.e. that
/// `M(x, y) = f(x) f(y)` yields a finite metric.
pub fn ff_finite_metric_check<F>(f: F, grid: &SampleGrid) -> GridVerdict<ProductWeightWitness>
where
    F: Fn(f64) -> f64,
{
    let ts = grid.points();
    let vals: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let tol = 1e-12;
    let witness = (|| {
        for i in 0..ts.len() - 1 {
            let (t0, t1) = (ts[i], ts[i + 1]);
            let (f0, f1) = (vals[i], vals[i + 1]);
            if f1.is_nan() || f1 < f0 - tol * f0.abs() {
                return Some(ProductWeightWitness::Decreasing { t0, t1 });
            }
            if t0 > 0.0 && f1 / t1 > (f0 / t0) * (1.0 + tol) {
                return Some(ProductWeightWitness::RatioIncreasing { t0, t1 });
            }
        }
        for i in 0..ts.len().saturating_sub(2) {
            let (t0, t1, t2) = (ts[i], ts[i + 1], ts[i + 2]);
            let chord = ((t2 - t1) * vals[i] + (t1 - t0) * vals[i + 2]) / (t2 - t0);
            if vals[i + 1] > chord + tol * chord.abs().max(1.0) {
                return Some(ProductWeightWitness::NotConvex { t0, t1, t2 });
            }
        }
        None
    })();
    GridVerdict {
        holds: witness.is_none(),
        witness,
    }
}

/// Scalar map used by [`MetricKind::ProductF`].
pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum MetricKind {
    Euclidean,
    PqRelative { p: f64, q: f64 },
    ProductF(ScalarMap),
    /// The chordal metric `q`, i.e. `M(x,y) = √(1+x²)√(1+y²)`.
    Spherical,
    CustomWeight(WeightFunction),
}

impl fmt::Debug for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Euclidean => write!(f, "Euclidean"),
            Self::PqRelative { p, q } => write!(f, "PqRelative({p}, {q})"),
            Self::ProductF(_) => write!(f, "ProductF(..)"),
            Self::Spherical => write!(f, "Spherical"),
            Self::CustomWeight(w) => write!(f, "CustomWeight({})", w.label()),
        }
    }
}

/// A relative metric on ℝⁿ.
#[derive(Debug, Clone)]
pub struct MetricDescriptor {
    kind: MetricKind,
    dimension: usize,
    weight: WeightFunction,
}

impl MetricDescriptor {
    pub fn new(kind: MetricKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let weight = match &kind {
            MetricKind::Euclidean => WeightFunction::constant(1.0),
            MetricKind::PqRelative { p, q } => {
                if !(*p > 0.0) || !(*q >= 0.0) {
                    return Err(invalid(format!("(p,q)-relative needs p > 0, q >= 0; got ({p}, {q})")));
                }
                WeightFunction::pq(*p, *q)
            }
            MetricKind::ProductF(f) => {
                let f = f.clone();
                WeightFunction::product_of("f(x)f(y)", move |t| f(t))
            }
            MetricKind::Spherical => WeightFunction::spherical(),
            MetricKind::CustomWeight(w) => w.clone(),
        };
        Ok(Self {
            kind,
            dimension,
            weight,
        })
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kind {
            MetricKind::Euclidean => dist(x, y),
            MetricKind::PqRelative { p, q } => rho_pq(*p, *q, x, y),
            _ => rho_m(&self.weight, x, y),
        }
    }
}

/// Sampled infimum and supremum of `d(g(x), g(y)) / d(x, y)` over random
/// distinct pairs. These bound the bilipschitz constants from inside.
///
/// The caller is responsible for `g(0) = 0`. Pairs with a zero or
/// non-finite base distance are skipped.
pub fn bilipschitz_estimate<G>(
    g: G,
    d: &MetricDescriptor,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    if n_samples < 2 {
        return Err(invalid("bilipschitz estimate needs at least 2 samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = d.dimension();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for _ in 0..n_samples {
        let x = random_point(&mut rng, n, FUZZ_MAGNITUDES.0, FUZZ_MAGNITUDES.1);
        let y = random_point(&mut rng, n, FUZZ_MAGNITUDES.0, FUZZ_MAGNITUDES.1);
        let base = d.distance(&x, &y);
        if !(base > 0.0 && base.is_finite()) {
            continue;
        }
        let ratio = d.distance(&g(&x), &g(&y)) / base;
        if ratio.is_finite() {
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    if lo > hi {
        return Err(invalid("no admissible sample pairs"));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{random_unit, scale, Matrix};
    use rand::Rng;
    use proptest::prelude::*;

    const E1: [f64; 2] = [1.0, 0.0];
    const E2: [f64; 2] = [0.0, 1.0];

    #[test]
    fn rho_m_examples() {
        let m = WeightFunction::sum();
        assert_eq!(rho_m(&m, &[3.0, 4.0], &[3.0, 4.0]), 0.0);
        assert_eq!(rho_m(&m, &E1, &[-1.0, 0.0]), 1.0);
        let one = WeightFunction::constant(1.0);
        assert_eq!(rho_m(&one, &[0.0, 0.0], &[3.0, 4.0]), 5.0);
        // 0/0 = 0 and x/0 = ∞.
        let prod = WeightFunction::scaled_product(1.0);
        assert_eq!(rho_m(&prod, &[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert_eq!(rho_m(&prod, &[0.0, 0.0], &E1), f64::INFINITY);
    }

    #[test]
    fn rho_pq_examples() {
        let x = [2.0, 0.0];
        assert_eq!(rho_pq(2.0, 0.0, &x, &E2), dist(&x, &E2));
        let v = rho_pq(f64::INFINITY, 1.0, &x, &E2);
        assert!((v - 5f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(rho_pq(1.5, 0.7, &x, &x), 0.0);
    }

    #[test]
    fn metricity_region() {
        assert!(pq_is_metric(1.0, 1.0));
        assert!(!pq_is_metric(0.3, 0.5));
        for p in [0.01, 0.5, 7.0, f64::INFINITY] {
            assert!(pq_is_metric(p, 0.0));
        }
        assert!(pq_is_metric(f64::INFINITY, 1.0));
        assert!(!pq_is_metric(2.0, 1.5));
        assert!(pq_is_metric(1.0 / 3.0, 1.0));
        assert!(!pq_is_metric(0.33, 1.0));
        assert!(pq_is_metric(0.5, 0.5));
    }

    #[test]
    fn criterion_examples() {
        let grid = SampleGrid::log_spaced(1.0, 1e6, 512).unwrap();
        let a1 = WeightFunction::power_mean(1.0);
        assert_eq!(
            metric_criterion_quasimean(&a1, 1.0, &grid).unwrap(),
            CriterionOutcome::SufficientHolds
        );
        for alpha in [0.3, 0.75, 1.0] {
            let s = WeightFunction::s_quasimean(alpha);
            assert_eq!(
                metric_criterion_quasimean(&s, alpha, &grid).unwrap(),
                CriterionOutcome::SufficientHolds
            );
        }
        let geo = WeightFunction::from_expression("sqrt(x*y)").unwrap();
        match metric_criterion_quasimean(&geo, 1.0, &grid).unwrap() {
            CriterionOutcome::NecessaryFails { x, m, s } => {
                assert!(m < s);
                assert!((m - x.sqrt()).abs() < 1e-12);
            }
            other => panic!("expected NecessaryFails, got {other:?}"),
        }
        // The worked value at x = 4.
        assert!(2.0 < s_quasimean(1.0, 4.0, 1.0));
        assert!((s_quasimean(1.0, 4.0, 1.0) - 3.0 / 4f64.ln()).abs() < 1e-15);

        assert!(metric_criterion_quasimean(&a1, 0.0, &grid).is_err());
        assert!(metric_criterion_quasimean(&WeightFunction::sum(), 1.0, &grid).is_err());
    }

    #[test]
    fn line_fuzz_examples() {
        let one = metric_on_line_fuzz(&WeightFunction::constant(1.0), 20_000, 1).unwrap();
        assert!(one.passes(1e-12), "{one:?}");
        let inv = metric_on_line_fuzz(&WeightFunction::scaled_product(1.0), 20_000, 2).unwrap();
        assert!(inv.passes(1e-12), "{inv:?}");
        let bad = metric_on_line_fuzz(&WeightFunction::pq(0.3, 0.5), 20_000, 3).unwrap();
        assert!(bad.worst_relative > 1e-6, "{bad:?}");
        let [x, y, z] = bad.witness.unwrap();
        let d = |a: &[f64], b: &[f64]| rho_pq(0.3, 0.5, a, b);
        assert!(crate::fuzz::triangle_violation(&d, &x, &y, &z).0 > 0.0);
        assert!(metric_on_line_fuzz(&WeightFunction::sum(), 0, 1).is_err());
    }

    #[test]
    fn ptolemy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let p: Vec<Vec<f64>> = (0..4).map(|_| random_point(&mut rng, 3, 0.1, 10.0)).collect();
            assert!(ptolemy_check(&p[0], &p[1], &p[2], &p[3]) <= 1e-12 * 100.0);
        }
        let x = [1.0, 2.0];
        assert_eq!(ptolemy_check(&x, &x, &[0.0, 5.0], &[3.0, 3.0]), 0.0);
    }

    #[test]
    fn ptolemy_equality_on_a_circle() {
        // Cyclic order x, z, y, w: the product of the diagonals equals the
        // sum of products of opposite sides.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let mut angles: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
            angles.sort_by(f64::total_cmp);
            let c = [0.3, -1.2];
            let r = 2.5;
            let pt = |t: f64| vec![c[0] + r * t.cos(), c[1] + r * t.sin()];
            let (x, z, y, w) = (pt(angles[0]), pt(angles[1]), pt(angles[2]), pt(angles[3]));
            let lhs = dist(&z, &w) * dist(&x, &y);
            let rhs = dist(&y, &w) * dist(&x, &z) + dist(&x, &w) * dist(&z, &y);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
            assert!(ptolemy_check(&x, &y, &z, &w) <= 1e-12 * lhs.max(1.0));
        }
    }

    #[test]
    fn product_weight_examples() {
        let grid = SampleGrid::default_with_zero();
        assert!(ff_finite_metric_check(|t| 1.0 + t, &grid).holds);
        assert!(ff_finite_metric_check(|t: f64| t.max(1.0), &grid).holds);
        let v = ff_finite_metric_check(f64::sqrt, &SampleGrid::new(vec![0.0, 2.0, 4.0]).unwrap());
        assert_eq!(
            v.witness,
            Some(ProductWeightWitness::NotConvex { t0: 0.0, t1: 2.0, t2: 4.0 })
        );
        assert!(!ff_finite_metric_check(f64::sqrt, &grid).holds);
        assert!(matches!(
            ff_finite_metric_check(|t| t * t, &grid).witness,
            Some(ProductWeightWitness::RatioIncreasing { .. })
        ));
    }

    #[test]
    fn bilipschitz_examples() {
        let inf1 = MetricDescriptor::new(MetricKind::PqRelative { p: f64::INFINITY, q: 1.0 }, 3).unwrap();
        let (lo, hi) = bilipschitz_estimate(|x| x.to_vec(), &inf1, 1000, 1).unwrap();
        assert_eq!((lo, hi), (1.0, 1.0));

        let (lo, hi) = bilipschitz_estimate(|x| scale(x, norm(x)), &inf1, 20_000, 2).unwrap();
        assert!(lo >= 0.5 - 1e-9 && hi <= 2.0 + 1e-9, "({lo}, {hi})");

        let sph = MetricDescriptor::new(MetricKind::Spherical, 3).unwrap();
        let inversion = |x: &[f64]| scale(x, 1.0 / crate::vector::dot(x, x));
        let (lo, hi) = bilipschitz_estimate(inversion, &sph, 20_000, 3).unwrap();
        assert!(lo >= 1.0 - 1e-9 && hi <= 1.0 + 1e-9, "({lo}, {hi})");
        assert!(bilipschitz_estimate(|x| x.to_vec(), &sph, 1, 3).is_err());
    }

    #[test]
    fn linear_bilipschitz_maps_obey_the_cubic_bound() {
        // g = Q·diag(s)·R with singular values in [1/L, L] is L-bilipschitz in norm.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let weights = [
            WeightFunction::sum(),
            WeightFunction::power_mean(1.0),
            WeightFunction::max(),
            WeightFunction::pq(2.0, 0.5),
            WeightFunction::product_of("1+x", |t| 1.0 + t),
        ];
        for m in weights {
            let d = MetricDescriptor::new(MetricKind::CustomWeight(m), 3).unwrap();
            for _ in 0..5 {
                let l: f64 = 1.0 + 2.0 * rng.random::<f64>();
                let q1 = Matrix::random_orthogonal(&mut rng, 3);
                let q2 = Matrix::random_orthogonal(&mut rng, 3);
                let s: Vec<f64> = (0..3).map(|_| (l.ln() * (2.0 * rng.random::<f64>() - 1.0)).exp()).collect();
                let g = |x: &[f64]| {
                    let y = q2.apply(x);
                    let y: Vec<f64> = y.iter().zip(&s).map(|(a, b)| a * b).collect();
                    q1.apply(&y)
                };
                let (lo, hi) = bilipschitz_estimate(g, &d, 2000, rng.random()).unwrap();
                assert!(hi <= l.powi(3) + 1e-9, "upper {hi} > L^3 = {}", l.powi(3));
                assert!(lo >= l.powi(-3) - 1e-9);
            }
        }
    }

    #[test]
    fn metric_region_fuzz_small() {
        for &(p, q) in &[(1.0, 1.0), (0.5, 0.5), (2.0, 0.25)] {
            let d = MetricDescriptor::new(MetricKind::PqRelative { p, q }, 3).unwrap();
            let r = metric_fuzz(&d, 20_000, 4).unwrap();
            assert!(r.passes(1e-12), "({p},{q}): {r:?}");
        }
    }

    fn point3() -> impl Strategy<Value = Vec<f64>> {
        (0u64..u64::MAX).prop_map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            random_point(&mut rng, 3, 1e-3, 1e3)
        })
    }

    proptest! {
        #[test]
        fn rho_pq_symmetric_and_positive(x in point3(), y in point3(), p in 0.1f64..5.0, q in 0.0f64..=1.0) {
            let a = rho_pq(p, q, &x, &y);
            prop_assert_eq!(a, rho_pq(p, q, &y, &x));
            prop_assert!(a > 0.0);
            prop_assert_eq!(rho_pq(p, q, &x, &x), 0.0);
        }

        #[test]
        fn rho_pq_is_homogeneous(x in point3(), y in point3(), p in 0.1f64..5.0, q in 0.0f64..=1.0, t in 1e-3f64..1e3) {
            let a = rho_pq(p, q, &scale(&x, t), &scale(&y, t));
            let b = t.powf(1.0 - q) * rho_pq(p, q, &x, &y);
            prop_assert!((a - b).abs() <= 1e-12 * b.max(f64::MIN_POSITIVE) * 10.0, "{} vs {}", a, b);
        }

        #[test]
        fn rho_m_is_rotation_invariant(x in point3(), y in point3(), seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = Matrix::random_orthogonal(&mut rng, 3);
            let m = WeightFunction::power_mean(0.5);
            let a = rho_m(&m, &r.apply(&x), &r.apply(&y));
            let b = rho_m(&m, &x, &y);
            prop_assert!((a - b).abs() <= 1e-12 * b * 10.0);
            let _ = random_unit(&mut rng, 3);
        }
    }
}
