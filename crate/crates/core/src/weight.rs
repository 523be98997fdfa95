//! Symmetric weight functions `M: [0,∞)² → [0,∞]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::expr::Expr;
use crate::means;

type WeightFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Abscissae used to validate symmetry and homogeneity at construction.
const PROBES: [f64; 9] = [0.0, 1e-3, 0.1, 0.5, 1.0, 1.7, 3.0, 10.0, 1e3];

/// A symmetric nonnegative weight `M(x, y)` with optional structural metadata.
#[derive(Clone)]
pub struct WeightFunction {
    eval: Arc<WeightFn>,
    homogeneity_degree: Option<f64>,
    quasimean_exponent: Option<f64>,
    label: String,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("label", &self.label)
            .field("homogeneity_degree", &self.homogeneity_degree)
            .field("quasimean_exponent", &self.quasimean_exponent)
            .finish()
    }
}

pub(crate) fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b || (a.is_nan() && b.is_nan()) {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

impl WeightFunction {
    /// Wraps `f`, checking symmetry on a fixed probe set.
    pub fn new<F>(label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        for &x in &PROBES {
            for &y in &PROBES {
                let (a, b) = (f(x, y), f(y, x));
                if !rel_close(a, b, 1e-12) {
                    return Err(invalid(format!(
                        "weight '{label}' is not symmetric: M({x}, {y}) = {a} but M({y}, {x}) = {b}"
                    )));
                }
                if a < 0.0 {
                    return Err(invalid(format!(
                        "weight '{label}' is negative: M({x}, {y}) = {a}"
                    )));
                }
            }
        }
        Ok(Self {
            eval: Arc::new(f),
            homogeneity_degree: None,
            quasimean_exponent: None,
            label,
        })
    }

    /// Declares `M(tx, ty) = t^h M(x, y)`, verified on probes to 1e-10 relative.
    pub fn with_homogeneity(mut self, h: f64) -> Result<Self> {
        for &t in &[0.1, 2.5, 13.0] {
            for &x in &PROBES[1..] {
                for &y in &PROBES[1..] {
                    let lhs = self.eval(t * x, t * y);
                    let rhs = t.powf(h) * self.eval(x, y);
                    if !rel_close(lhs, rhs, 1e-10) {
                        return Err(invalid(format!(
                            "weight '{}' is not {h}-homogeneous at t={t}, (x,y)=({x},{y})",
                            self.label
                        )));
                    }
                }
            }
        }
        self.homogeneity_degree = Some(h);
        Ok(self)
    }

    pub fn with_quasimean_exponent(mut self, alpha: f64) -> Self {
        self.quasimean_exponent = Some(alpha);
        self
    }

    /// Parses an expression in `x` and `y` (see [`crate::expr`]).
    pub fn from_expression(src: &str) -> Result<Self> {
        let e = Expr::parse(src)?;
        Self::new(src.trim().to_string(), move |x, y| e.eval(x, y))
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.eval)(x, y)
    }

    /// The trace `t_M(x) = M(x, 1)`, defined for `x >= 1`.
    pub fn trace(&self, x: f64) -> Result<f64> {
        means::trace(self, x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn homogeneity_degree(&self) -> Option<f64> {
        self.homogeneity_degree
    }

    pub fn quasimean_exponent(&self) -> Option<f64> {
        self.quasimean_exponent
    }

    /// `M ≡ c`.
    pub fn constant(c: f64) -> Self {
        Self::trusted(format!("{c}"), move |_, _| c, Some(0.0), None)
    }

    /// `M(x, y) = x + y`.
    pub fn sum() -> Self {
        Self::trusted("x+y", |x, y| x + y, Some(1.0), None)
    }

    /// `M(x, y) = c·x·y`.
    pub fn scaled_product(c: f64) -> Self {
        Self::trusted(format!("{c}*x*y"), move |x, y| c * x * y, Some(2.0), None)
    }

    /// `M(x, y) = f(x)·f(y)`.
    pub fn product_of<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::trusted(label, move |x, y| f(x) * f(y), None, None)
    }

    /// Power mean `A_p`, `p ∈ [−∞, ∞]`.
    pub fn power_mean(p: f64) -> Self {
        Self::trusted(
            format!("A_{p}"),
            move |x, y| means::power_mean(p, x, y),
            Some(1.0),
            Some(1.0),
        )
    }

    /// `A_p^q`, the normalized (`M(1,1) = 1`) form of the (p,q)-relative weight.
    pub fn power_mean_pow(p: f64, q: f64) -> Self {
        Self::trusted(
            format!("A_{p}^{q}"),
            move |x, y| means::power_mean(p, x, y).powf(q),
            Some(q),
            Some(q),
        )
    }

    /// `(x^p + y^p)^{q/p}`; `p = ∞` (or `p > 1e6`) is `max{x, y}^q`.
    pub fn pq(p: f64, q: f64) -> Self {
        Self::trusted(
            format!("(x^{p}+y^{p})^({q}/{p})"),
            move |x, y| pq_weight(p, q, x, y),
            Some(q),
            None,
        )
    }

    /// The quasimean `S_p`, `0 < p <= 1`.
    pub fn s_quasimean(p: f64) -> Self {
        Self::trusted(
            format!("S_{p}"),
            move |x, y| means::s_quasimean(p, x, y),
            Some(p),
            Some(p),
        )
    }

    /// `max{x, y}`.
    pub fn max() -> Self {
        Self::power_mean(f64::INFINITY)
    }

    /// `√(1+x²)·√(1+y²)`: the weight of the chordal metric.
    pub fn spherical() -> Self {
        Self::trusted(
            "sqrt(1+x^2)*sqrt(1+y^2)",
            |x, y| x.hypot(1.0) * y.hypot(1.0),
            None,
            None,
        )
    }

    fn trusted<F>(
        label: impl Into<String>,
        f: F,
        homogeneity_degree: Option<f64>,
        quasimean_exponent: Option<f64>,
    ) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            homogeneity_degree,
            quasimean_exponent,
            label: label.into(),
        }
    }
}

/// `(x^p + y^p)^{q/p}` evaluated without overflow; large `p` uses the max branch.
pub fn pq_weight(p: f64, q: f64, x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if q == 0.0 {
        return 1.0;
    }
    if p.is_infinite() || p > 1e6 {
        return hi.powf(q);
    }
    if hi == 0.0 {
        return 0.0;
    }
    // (hi^p (1 + (lo/hi)^p))^{q/p} = hi^q (1 + (lo/hi)^p)^{q/p}
    hi.powf(q) * (1.0 + (lo / hi).powf(p)).powf(q / p)
}
