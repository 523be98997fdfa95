//! Sample grids for the grid-based structural predicates.

use crate::error::{invalid, Result};

/// Sorted, strictly increasing abscissae on which a predicate is tested.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    points: Vec<f64>,
}

impl SampleGrid {
    /// Default resolution for the monotonicity predicates.
    pub const DEFAULT_POINTS: usize = 512;

    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(invalid("grid contains a non-finite abscissa"));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        if points.len() < 2 {
            return Err(invalid("grid needs at least 2 distinct points"));
        }
        Ok(Self { points })
    }

    /// `n` log-spaced points on [lo, hi]; requires 0 < lo < hi.
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) {
            return Err(invalid(format!("log grid needs 0 < lo < hi, got [{lo}, {hi}]")));
        }
        if n < 2 {
            return Err(invalid("grid needs at least 2 points"));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
        pts[0] = lo;
        pts[n - 1] = hi;
        Self::new(pts)
    }

    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || n < 2 {
            return Err(invalid("linear grid needs lo < hi and at least 2 points"));
        }
        let step = (hi - lo) / (n - 1) as f64;
        Self::new((0..n).map(|i| lo + step * i as f64).collect())
    }

    /// Log grid over [1e-6, 1e6] with 512 points.
    pub fn default_positive() -> Self {
        Self::log_spaced(1e-6, 1e6, Self::DEFAULT_POINTS).expect("static grid is valid")
    }

    /// `{0}` followed by the default positive grid.
    pub fn default_with_zero() -> Self {
        let mut pts = vec![0.0];
        pts.extend(Self::default_positive().points);
        Self::new(pts).expect("static grid is valid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        self.points[0] > 0.0
    }
}
