//! Chordal metric and cross-ratios on the extended space `ℝⁿ ∪ {∞}`, the
//! hyperbolic metric of the ball and half-space, Möbius maps, and the
//! cross-ratio distances `ρ'_{M,G}`, `δ_G^p` and `ρ_G` of a domain given by
//! its boundary.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::means::power_mean;
use crate::optimize::golden_max;
use crate::vector::{axpy, basis, dist, dot, norm, normalized, random_point, random_unit, scale, sub, Matrix};
use crate::weight::WeightFunction;

/// A point of `ℝⁿ ∪ {∞}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub enum ExtendedPoint {
    Finite(Vec<f64>),
    Infinity,
}

/// JSON form: a coordinate array, or the string `"inf"`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Coords(Vec<f64>),
    Marker(String),
}

impl TryFrom<PointRepr> for ExtendedPoint {
    type Error = String;
    fn try_from(r: PointRepr) -> std::result::Result<Self, String> {
        match r {
            PointRepr::Coords(v) => Ok(ExtendedPoint::Finite(v)),
            PointRepr::Marker(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => Ok(ExtendedPoint::Infinity),
            PointRepr::Marker(s) => Err(format!("unknown point marker {s:?}")),
        }
    }
}

impl From<ExtendedPoint> for PointRepr {
    fn from(p: ExtendedPoint) -> Self {
        match p {
            ExtendedPoint::Finite(v) => PointRepr::Coords(v),
            ExtendedPoint::Infinity => PointRepr::Marker("inf".into()),
        }
    }
}

impl From<Vec<f64>> for ExtendedPoint {
    fn from(v: Vec<f64>) -> Self {
        ExtendedPoint::Finite(v)
    }
}

impl From<&[f64]> for ExtendedPoint {
    fn from(v: &[f64]) -> Self {
        ExtendedPoint::Finite(v.to_vec())
    }
}

impl ExtendedPoint {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedPoint::Infinity)
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            ExtendedPoint::Finite(v) => Some(v),
            ExtendedPoint::Infinity => None,
        }
    }

    /// Image on the sphere of diameter 1 in `ℝⁿ⁺¹` touching ℝⁿ at 0; the
    /// Euclidean distance of images is the chordal distance.
    fn embed(&self, n: usize) -> Vec<f64> {
        match self {
            ExtendedPoint::Infinity => basis(n + 1, n),
            ExtendedPoint::Finite(x) => {
                let r2 = dot(x, x);
                let s = 1.0 / (1.0 + r2);
                let mut v = scale(x, s);
                v.push(1.0 / (1.0 + 1.0 / r2));
                v
            }
        }
    }
}

/// Chordal distance `|x−y| / (√(1+|x|²) √(1+|y|²))`, with `q(x, ∞) = 1/√(1+|x|²)`.
pub fn chordal(x: &ExtendedPoint, y: &ExtendedPoint) -> f64 {
    match (x, y) {
        (ExtendedPoint::Infinity, ExtendedPoint::Infinity) => 0.0,
        (ExtendedPoint::Finite(a), ExtendedPoint::Infinity) | (ExtendedPoint::Infinity, ExtendedPoint::Finite(a)) => {
            1.0 / 1f64.hypot(norm(a))
        }
        (ExtendedPoint::Finite(a), ExtendedPoint::Finite(b)) => dist(a, b) / 1f64.hypot(norm(a)) / 1f64.hypot(norm(b)),
    }
}

/// `|a,b,c,d| = q(a,c) q(b,d) / (q(a,b) q(c,d))`; a vanishing denominator
/// gives `+∞`, or 0 if the numerator vanishes too.
pub fn cross_ratio(a: &ExtendedPoint, b: &ExtendedPoint, c: &ExtendedPoint, d: &ExtendedPoint) -> f64 {
    let num = chordal(a, c) * chordal(b, d);
    let den = chordal(a, b) * chordal(c, d);
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// `arch(1 + t)` for `t >= 0`, accurate for small `t`.
pub fn arch1p(t: f64) -> f64 {
    (t + (t * (t + 2.0)).sqrt()).ln_1p()
}

/// Hyperbolic distance in the unit ball.
pub fn hyperbolic_ball(x: &[f64], y: &[f64]) -> Result<f64> {
    let (nx, ny) = (norm(x), norm(y));
    if !(nx < 1.0 && ny < 1.0) {
        return Err(domain("points must lie in the open unit ball"));
    }
    let den = ((1.0 - nx) * (1.0 + nx)).sqrt() * ((1.0 - ny) * (1.0 + ny)).sqrt();
    Ok(2.0 * (dist(x, y) / den).asinh())
}

/// Hyperbolic distance in the upper half-space `x_n > 0`.
pub fn hyperbolic_half_space(x: &[f64], y: &[f64]) -> Result<f64> {
    let (hx, hy) = (x[x.len() - 1], y[y.len() - 1]);
    if !(hx > 0.0 && hy > 0.0) {
        return Err(domain("points must lie in the upper half-space"));
    }
    let d = dist(x, y);
    Ok(arch1p(d * d / (2.0 * hx * hy)))
}

// ---------------------------------------------------------------- Möbius maps

#[derive(Debug, Clone, PartialEq)]
pub enum MobiusPrimitive {
    /// `x ↦ c + r²(x−c)/|x−c|²`, swapping `c` and ∞.
    Inversion { center: Vec<f64>, radius: f64 },
    Orthogonal(Matrix),
    Translation(Vec<f64>),
    Dilation(f64),
}

impl MobiusPrimitive {
    fn apply(&self, p: &ExtendedPoint) -> ExtendedPoint {
        use ExtendedPoint::*;
        match (self, p) {
            (MobiusPrimitive::Inversion { center, .. }, Infinity) => Finite(center.clone()),
            (MobiusPrimitive::Inversion { center, radius }, Finite(x)) => {
                let d = sub(x, center);
                let d2 = dot(&d, &d);
                if d2 == 0.0 {
                    Infinity
                } else {
                    Finite(axpy(center, radius * radius / d2, &d))
                }
            }
            (_, Infinity) => Infinity,
            (MobiusPrimitive::Orthogonal(m), Finite(x)) => Finite(m.apply(x)),
            (MobiusPrimitive::Translation(t), Finite(x)) => Finite(axpy(x, 1.0, t)),
            (MobiusPrimitive::Dilation(s), Finite(x)) => Finite(scale(x, *s)),
        }
    }
}

/// A composition of primitives, applied first to last.
#[derive(Debug, Clone, PartialEq)]
pub struct MobiusMap {
    pub dimension: usize,
    pub ops: Vec<MobiusPrimitive>,
}

impl MobiusMap {
    pub fn identity(dimension: usize) -> Self {
        Self { dimension, ops: Vec::new() }
    }

    pub fn then(mut self, op: MobiusPrimitive) -> Self {
        self.ops.push(op);
        self
    }

    pub fn apply(&self, p: &ExtendedPoint) -> ExtendedPoint {
        self.ops.iter().fold(p.clone(), |acc, op| op.apply(&acc))
    }

    /// Image of a finite point; `None` if it is sent to ∞.
    pub fn apply_finite(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self.apply(&ExtendedPoint::Finite(x.to_vec())) {
            ExtendedPoint::Finite(v) => Some(v),
            ExtendedPoint::Infinity => None,
        }
    }

    /// Self-map of the unit ball sending `a` to 0, followed by `orth`.
    pub fn ball_to_origin(a: &[f64], orth: Option<Matrix>) -> Result<Self> {
        let na2 = dot(a, a);
        if na2 >= 1.0 {
            return Err(domain("center must lie in the open unit ball"));
        }
        let mut map = Self::identity(a.len());
        if na2 > 0.0 {
            // The sphere about a/|a|² with radius² 1/|a|² − 1 is orthogonal
            // to the unit sphere, and the inversion in it sends a to 0.
            map = map.then(MobiusPrimitive::Inversion {
                center: scale(a, 1.0 / na2),
                radius: (1.0 / na2 - 1.0).sqrt(),
            });
        }
        if let Some(m) = orth {
            map = map.then(MobiusPrimitive::Orthogonal(m));
        }
        Ok(map)
    }

    /// Random self-map of the unit ball: a center drawn with `|a| <= max_norm`
    /// and a random orthogonal map.
    pub fn random_ball_map<R: Rng + ?Sized>(rng: &mut R, n: usize, max_norm: f64) -> Self {
        let a = scale(&random_unit(rng, n), max_norm * rng.random::<f64>());
        let orth = Matrix::random_orthogonal(rng, n);
        Self::ball_to_origin(&a, Some(orth)).expect("|a| < 1")
    }

    /// Random composition of `n_ops` primitives with moderate parameters.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, n_ops: usize) -> Self {
        let mut map = Self::identity(n);
        for _ in 0..n_ops {
            let op = match rng.random_range(0..4) {
                0 => MobiusPrimitive::Inversion {
                    center: random_point(rng, n, 0.1, 2.0),
                    radius: rng.random_range(0.5..2.0),
                },
                1 => MobiusPrimitive::Orthogonal(Matrix::random_orthogonal(rng, n)),
                2 => MobiusPrimitive::Translation((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()),
                _ => MobiusPrimitive::Dilation(rng.random_range(0.5..2.0)),
            };
            map = map.then(op);
        }
        map
    }
}

// ------------------------------------------------------- Möbius invariance of ρ_M

#[derive(Debug, Clone, Serialize)]
pub struct MobiusWitness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Point sent to the origin by the map.
    pub map_center: Vec<f64>,
    pub before: f64,
    pub after: f64,
}

/// One instance of the equal-radius construction: `|x| = |y| = r`,
/// `|x − y| = r√(1−r²)`, and a ball map `g` with `g(y) = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct EqualRadiusConstruction {
    pub r: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub gx: Vec<f64>,
    pub d: f64,
    /// The only value of `f(r)` compatible with invariance, `d / r`.
    pub forced: f64,
}

pub fn equal_radius_construction(r: f64, n: usize) -> Result<EqualRadiusConstruction> {
    if !(r > 0.0 && r < 1.0) || n < 2 {
        return Err(invalid("need 0 < r < 1 and dimension >= 2"));
    }
    let d = r * (1.0 - r * r).sqrt();
    // Chord of length d on the circle of radius r: half-angle asin(d / 2r).
    let phi = 2.0 * (d / (2.0 * r)).asin();
    let y = scale(&basis(n, 0), r);
    let x = axpy(&scale(&basis(n, 0), r * phi.cos()), r * phi.sin(), &basis(n, 1));
    let g = MobiusMap::ball_to_origin(&y, None)?;
    let gx = g.apply_finite(&x).expect("x ≠ inversion center");
    Ok(EqualRadiusConstruction { r, x, y, gx, d, forced: d / r })
}

#[derive(Debug, Clone, Serialize)]
pub struct MobiusInvarianceReport {
    pub invariant: bool,
    /// Largest relative change of `ρ_M` over sampled maps and pairs.
    pub max_residual: f64,
    pub witness: Option<MobiusWitness>,
    pub constructions: Vec<EqualRadiusConstruction>,
}

pub const MOBIUS_TOL: f64 = 1e-9;

/// Tests whether `ρ_M`, `M(s,t) = f(s)f(t)`, is invariant under sampled
/// Möbius self-maps of the unit ball of ℝ³.
pub fn mobius_invariance_test<F>(f: F, n_samples: usize, seed: u64) -> Result<MobiusInvarianceReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    if (f(0.0) - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("f(0) must be 1, got {}", f(0.0))));
    }
    let n = 3;
    let rho = |x: &[f64], y: &[f64]| {
        let d = dist(x, y);
        if d == 0.0 {
            0.0
        } else {
            d / (f(norm(x)) * f(norm(y)))
        }
    };
    let residual = |before: f64, after: f64| {
        if before == after {
            0.0
        } else {
            (after - before).abs() / before.abs().max(after.abs())
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<(f64, MobiusWitness)> = None;
    let mut consider = |res: f64, w: MobiusWitness| {
        let res = if res.is_nan() { f64::INFINITY } else { res };
        if worst.as_ref().is_none_or(|(r, _)| res > *r) {
            worst = Some((res, w));
        }
    };
    for _ in 0..n_samples {
        let a = scale(&random_unit(&mut rng, n), 0.9 * rng.random::<f64>());
        let g = MobiusMap::ball_to_origin(&a, Some(Matrix::random_orthogonal(&mut rng, n)))?;
        let x = scale(&random_unit(&mut rng, n), 0.9 * rng.random::<f64>());
        let y = scale(&random_unit(&mut rng, n), 0.9 * rng.random::<f64>());
        let (gx, gy) = (g.apply_finite(&x), g.apply_finite(&y));
        let (Some(gx), Some(gy)) = (gx, gy) else { continue };
        let (before, after) = (rho(&x, &y), rho(&gx, &gy));
        consider(residual(before, after), MobiusWitness { x, y, map_center: a, before, after });
    }
    let mut constructions = Vec::new();
    for k in 1..=9 {
        let c = equal_radius_construction(0.1 * k as f64, n)?;
        let (before, after) = (rho(&c.x, &c.y), rho(&c.gx, &vec![0.0; n]));
        consider(
            residual(before, after),
            MobiusWitness { x: c.x.clone(), y: c.y.clone(), map_center: c.y.clone(), before, after },
        );
        constructions.push(c);
    }
    let (max_residual, witness) = worst.map(|(r, w)| (r, Some(w))).unwrap_or((0.0, None));
    let invariant = max_residual <= MOBIUS_TOL;
    Ok(MobiusInvarianceReport {
        invariant,
        max_residual,
        witness: if invariant { None } else { witness },
        constructions,
    })
}

// ------------------------------------------------------------------- domains

pub const DEFAULT_BOUNDARY_SAMPLES: usize = 2048;

fn default_samples() -> usize {
    DEFAULT_BOUNDARY_SAMPLES
}

/// A domain `G ⊂ ℝⁿ ∪ {∞}` described through its boundary.
///
/// * `finite`: `G` is the complement of finitely many points.
/// * `ball`: the open ball; its sphere boundary is sampled.
/// * `half_space`: `{x_n > 0}`; the boundary hyperplane plus ∞ is sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainSpec {
    Finite {
        points: Vec<ExtendedPoint>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    HalfSpace {
        dimension: usize,
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

impl DomainSpec {
    /// `ℝⁿ ∖ {0}`, whose boundary is `{0, ∞}`.
    pub fn punctured(n: usize) -> Self {
        DomainSpec::Finite { points: vec![ExtendedPoint::Finite(vec![0.0; n]), ExtendedPoint::Infinity] }
    }

    pub fn unit_ball(n: usize) -> Self {
        DomainSpec::Ball { center: vec![0.0; n], radius: 1.0, samples: DEFAULT_BOUNDARY_SAMPLES }
    }

    pub fn upper_half_space(n: usize) -> Self {
        DomainSpec::HalfSpace { dimension: n, samples: DEFAULT_BOUNDARY_SAMPLES }
    }

    pub fn dimension(&self) -> Option<usize> {
        match self {
            DomainSpec::Finite { points } => points.iter().find_map(|p| p.coords().map(<[f64]>::len)),
            DomainSpec::Ball { center, .. } => Some(center.len()),
            DomainSpec::HalfSpace { dimension, .. } => Some(*dimension),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDomain(m));
        match self {
            DomainSpec::Finite { points } => {
                let dims: Vec<usize> = points.iter().filter_map(|p| p.coords().map(<[f64]>::len)).collect();
                if dims.windows(2).any(|w| w[0] != w[1]) || dims.contains(&0) {
                    return bad("boundary points must share a positive dimension".into());
                }
                let infinities = points.iter().filter(|p| p.is_infinite()).count();
                if dims.is_empty() && infinities > 0 {
                    return bad("boundary {∞} alone has one point".into());
                }
                let distinct = (0..points.len()).any(|i| (0..i).any(|j| points[i] != points[j]));
                if !distinct {
                    return bad("boundary needs at least 2 distinct points".into());
                }
                if points.iter().flat_map(|p| p.coords().unwrap_or(&[])).any(|v| !v.is_finite()) {
                    return bad("boundary coordinates must be finite".into());
                }
                Ok(())
            }
            DomainSpec::Ball { center, radius, samples } => {
                if center.is_empty() || !(*radius > 0.0 && radius.is_finite()) {
                    return bad("ball needs a nonempty center and a positive radius".into());
                }
                if *samples < 2 {
                    return bad("need at least 2 boundary samples".into());
                }
                Ok(())
            }
            DomainSpec::HalfSpace { dimension, samples } => {
                if *dimension == 0 || *samples < 2 {
                    return bad("half-space needs dimension >= 1 and at least 2 boundary samples".into());
                }
                Ok(())
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if self.dimension() != Some(x.len()) {
            return false;
        }
        match self {
            DomainSpec::Finite { points } => points.iter().all(|p| p.coords() != Some(x)),
            DomainSpec::Ball { center, radius, .. } => dist(x, center) < *radius,
            DomainSpec::HalfSpace { .. } => x[x.len() - 1] > 0.0,
        }
    }

    /// Boundary point parametrized by a unit vector (sampled boundaries).
    fn boundary_at(&self, u: &[f64]) -> ExtendedPoint {
        match self {
            DomainSpec::Ball { center, radius, .. } => ExtendedPoint::Finite(axpy(center, *radius, u)),
            DomainSpec::HalfSpace { dimension, .. } => {
                // Inversion about −e_n with radius √2 maps the unit sphere
                // onto {x_n = 0} ∪ {∞}.
                let c = scale(&basis(*dimension, dimension - 1), -1.0);
                let d = sub(u, &c);
                let d2 = dot(&d, &d);
                if d2 < 1e-300 {
                    return ExtendedPoint::Infinity;
                }
                let mut p = axpy(&c, 2.0 / d2, &d);
                // Exactly on the boundary plane.
                p[dimension - 1] = 0.0;
                ExtendedPoint::Finite(p)
            }
            DomainSpec::Finite { .. } => unreachable!("finite boundaries are enumerated"),
        }
    }

    /// Whole boundary when it is finite (including 1-D balls and half-lines).
    fn finite_boundary(&self) -> Option<Vec<ExtendedPoint>> {
        match self {
            DomainSpec::Finite { points } => Some(points.clone()),
            DomainSpec::Ball { center, radius, .. } if center.len() == 1 => Some(vec![
                ExtendedPoint::Finite(vec![center[0] - radius]),
                ExtendedPoint::Finite(vec![center[0] + radius]),
            ]),
            DomainSpec::HalfSpace { dimension: 1, .. } => {
                Some(vec![ExtendedPoint::Finite(vec![0.0]), ExtendedPoint::Infinity])
            }
            _ => None,
        }
    }

    fn samples(&self) -> usize {
        match self {
            DomainSpec::Ball { samples, .. } | DomainSpec::HalfSpace { samples, .. } => *samples,
            DomainSpec::Finite { points } => points.len(),
        }
    }

    /// Image of a finite-boundary domain under a Möbius map.
    pub fn push_forward(&self, f: &MobiusMap) -> Result<Self> {
        match self {
            DomainSpec::Finite { points } => Ok(DomainSpec::Finite { points: points.iter().map(|p| f.apply(p)).collect() }),
            _ => Err(invalid("only finite boundaries can be pushed forward")),
        }
    }
}

/// Deterministic, roughly uniform points on `S^{n−1}`: equispaced for
/// n = 2, a Fibonacci lattice for n = 3, seeded random otherwise.
fn sphere_samples(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        2 => (0..count)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (2 * i + 1) as f64 / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            (0..count).map(|_| random_unit(&mut rng, n)).collect()
        }
    }
}

/// A boundary point with its chordal distances to `x` and `y`.
struct Probe {
    emb: Vec<f64>,
    qx: f64,
    qy: f64,
}

impl Probe {
    fn new(p: &ExtendedPoint, n: usize, x: &ExtendedPoint, y: &ExtendedPoint) -> Self {
        Probe { emb: p.embed(n), qx: chordal(p, x), qy: chordal(p, y) }
    }
}

/// Objective over unordered boundary pairs, given `q(a,b)`.
type PairObjective<'a> = &'a (dyn Fn(f64, &Probe, &Probe) -> f64 + Sync);

fn tangent_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        if out.len() == n - 1 {
            break;
        }
        let mut v = basis(n, i);
        v = axpy(&v, -dot(&v, u), u);
        for w in &out {
            v = axpy(&v, -dot(&v, w), w);
        }
        let nv = norm(&v);
        if nv > 0.3 {
            out.push(scale(&v, 1.0 / nv));
        }
    }
    out
}

/// Supremum of a symmetric pair objective over `∂G × ∂G` (distinct points).
fn boundary_sup(g: &DomainSpec, x: &[f64], y: &[f64], obj: PairObjective<'_>) -> Result<f64> {
    g.validate()?;
    if !g.contains(x) || !g.contains(y) {
        return Err(domain("points must lie in the domain"));
    }
    let n = x.len();
    let (xe, ye) = (ExtendedPoint::from(x), ExtendedPoint::from(y));
    let probe = |p: &ExtendedPoint| Probe::new(p, n, &xe, &ye);
    let pair = |a: &Probe, b: &Probe| {
        let qab = dist(&a.emb, &b.emb);
        if qab == 0.0 {
            f64::NEG_INFINITY
        } else {
            obj(qab, a, b)
        }
    };

    if let Some(points) = g.finite_boundary() {
        let probes: Vec<Probe> = points.iter().map(probe).collect();
        let mut best = f64::NEG_INFINITY;
        for i in 0..probes.len() {
            for j in 0..i {
                best = best.max(pair(&probes[i], &probes[j]));
            }
        }
        return Ok(best);
    }

    let units = sphere_samples(n, g.samples());
    let probes: Vec<Probe> = units.iter().map(|u| probe(&g.boundary_at(u))).collect();
    let (bi, bj, _) = (1..probes.len())
        .into_par_iter()
        .map(|i| {
            (0..i).fold((i, 0, f64::NEG_INFINITY), |acc, j| {
                let v = pair(&probes[i], &probes[j]);
                if v > acc.2 {
                    (i, j, v)
                } else {
                    acc
                }
            })
        })
        .reduce(|| (0, 0, f64::NEG_INFINITY), |a, b| if b.2 > a.2 || (b.2 == a.2 && (b.0, b.1) < (a.0, a.1)) { b } else { a });

    // Coordinate ascent on (S^{n−1})² by golden-section line searches.
    let value = |ua: &[f64], ub: &[f64]| pair(&probe(&g.boundary_at(ua)), &probe(&g.boundary_at(ub)));
    let mut u = [units[bi].clone(), units[bj].clone()];
    let mut best = value(&u[0], &u[1]);
    let mut h = 4.0 * (4.0 * PI / probes.len() as f64).sqrt().min(0.25);
    for _ in 0..400 {
        let mut moved: f64 = 0.0;
        for k in 0..2 {
            for dir in tangent_basis(&u[k]) {
                let base = u[k].clone();
                let other = u[1 - k].clone();
                let at = |t: f64| normalized(&axpy(&base, t, &dir));
                let line = |t: f64| if k == 0 { value(&at(t), &other) } else { value(&other, &at(t)) };
                let (t, v) = golden_max(line, -h, h, 1e-4 * h);
                if v > best {
                    best = v;
                    u[k] = at(t);
                    moved = moved.max(t.abs());
                }
            }
        }
        if moved < 0.25 * h {
            h *= 0.25;
        }
        if h < 1e-9 {
            break;
        }
    }
    Ok(best)
}

/// `ρ'_{M,G}(x,y) = sup_{a,b∈∂G} 1/M(|x,y,a,b|, |x,y,b,a|)`.
pub fn rho_prime_with<M>(m: M, g: &DomainSpec, x: &[f64], y: &[f64]) -> Result<f64>
where
    M: Fn(f64, f64) -> f64 + Sync,
{
    if x == y {
        g.validate()?;
        return Ok(0.0);
    }
    let (xe, ye) = (ExtendedPoint::from(x), ExtendedPoint::from(y));
    let qxy = chordal(&xe, &ye);
    let obj = |qab: f64, a: &Probe, b: &Probe| {
        let u = a.qx * b.qy / (qxy * qab);
        let v = b.qx * a.qy / (qxy * qab);
        1.0 / m(u, v)
    };
    boundary_sup(g, x, y, &obj)
}

pub fn rho_prime(m: &WeightFunction, g: &DomainSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    rho_prime_with(|u, v| m.eval(u, v), g, x, y)
}

/// `δ_G^p = log(1 + ρ'_{M,G})` with `M = max{1, 2^{−1/p}}·A_p`.
pub fn seittenranta(p: f64, g: &DomainSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if p.is_nan() {
        return Err(invalid("p must be an extended real"));
    }
    let factor = (-1.0 / p).exp2().max(1.0);
    Ok(rho_prime_with(|u, v| factor * power_mean(p, u, v), g, x, y)?.ln_1p())
}

/// `ρ_G(x,y) = arch(1 + sup_{a,b∈∂G} |a,x,b,y||a,y,b,x|/2)`.
pub fn rho_g(g: &DomainSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x == y {
        g.validate()?;
        return Ok(0.0);
    }
    let (xe, ye) = (ExtendedPoint::from(x), ExtendedPoint::from(y));
    let qxy = chordal(&xe, &ye);
    let obj = |qab: f64, a: &Probe, b: &Probe| {
        let t = qab * qxy;
        t * t / (2.0 * a.qx * a.qy * b.qx * b.qy)
    };
    Ok(arch1p(boundary_sup(g, x, y, &obj)?))
}

/// Closed form of `ρ_G` on `ℝⁿ ∖ {0}`: `arch(1 + |x−y|²/(2|x||y|))`.
pub fn rho_g_punctured(x: &[f64], y: &[f64]) -> f64 {
    let d = dist(x, y);
    arch1p(d * d / (2.0 * norm(x) * norm(y)))
}

/// Experimental family `arch(1 + ρ'_{A_0,G}^p / p)`, `p > 0`. Its metric
/// property is not known for `p ≠ 2`.
pub fn rho_g_power(p: f64, g: &DomainSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid("p must be positive and finite"));
    }
    let rp = rho_prime_with(|u, v| power_mean(0.0, u, v), g, x, y)?;
    Ok(arch1p(rp.powf(p) / p))
}

/// Chordal diameter `q(∂G)` of a boundary.
pub fn chordal_diameter(g: &DomainSpec) -> Result<f64> {
    g.validate()?;
    match g.finite_boundary() {
        Some(points) => {
            let mut best: f64 = 0.0;
            for i in 0..points.len() {
                for j in 0..i {
                    best = best.max(chordal(&points[i], &points[j]));
                }
            }
            Ok(best)
        }
        None => {
            let n = g.dimension().expect("sampled domains have a dimension");
            let pts: Vec<Vec<f64>> = sphere_samples(n, g.samples()).iter().map(|u| g.boundary_at(u).embed(n)).collect();
            Ok((0..pts.len())
                .into_par_iter()
                .map(|i| (0..i).map(|j| dist(&pts[i], &pts[j])).fold(0.0, f64::max))
                .reduce(|| 0.0, f64::max))
        }
    }
}

/// The lower bound `cosh((q(∂G)·q(x,y))²) − 1`.
pub fn rho_g_lower_bound(g: &DomainSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let t = chordal_diameter(g)? * chordal(&x.into(), &y.into());
    Ok((t * t).cosh() - 1.0)
}

// -------------------------------------------------------------- property suite

#[derive(Debug, Clone, Serialize)]
pub struct RhoGPropertiesReport {
    pub samples: usize,
    pub seed: u64,
    /// Largest relative change of `ρ_G` when points and boundary are pushed
    /// through a random Möbius map (finite boundaries).
    pub mobius_max_drift: f64,
    /// Pairs where a smaller boundary gave a larger value.
    pub monotonicity_violations: usize,
    pub lower_bound_violations: usize,
    /// Largest `|ρ_G − ρ|` against the hyperbolic metric of the unit ball.
    pub ball_max_deviation: f64,
    /// Same for the upper half-space.
    pub half_space_max_deviation: f64,
}

pub const MOBIUS_DRIFT_TOL: f64 = 1e-9;
pub const SAMPLED_BOUNDARY_TOL: f64 = 1e-4;

impl RhoGPropertiesReport {
    pub fn passes(&self) -> bool {
        self.mobius_max_drift <= MOBIUS_DRIFT_TOL
            && self.monotonicity_violations == 0
            && self.lower_bound_violations == 0
            && self.ball_max_deviation <= SAMPLED_BOUNDARY_TOL
            && self.half_space_max_deviation <= SAMPLED_BOUNDARY_TOL
    }
}

fn random_finite_boundary<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<ExtendedPoint> {
    let mut pts: Vec<ExtendedPoint> = (0..k).map(|_| ExtendedPoint::Finite(random_point(rng, n, 0.2, 3.0))).collect();
    if rng.random::<bool>() {
        pts.push(ExtendedPoint::Infinity);
    }
    pts
}

/// Point of `G` away from every boundary point of a finite boundary.
fn random_interior<R: Rng + ?Sized>(rng: &mut R, n: usize, boundary: &[ExtendedPoint]) -> Vec<f64> {
    loop {
        let x = random_point(rng, n, 0.2, 3.0);
        if boundary.iter().all(|b| b.coords().is_none_or(|c| dist(c, &x) > 0.1)) {
            return x;
        }
    }
}

/// Samples Möbius invariance, domain monotonicity, the lower bound and
/// agreement with the hyperbolic metric of `B³` and the upper half-space.
pub fn rho_g_properties_test(n_samples: usize, seed: u64) -> Result<RhoGPropertiesReport> {
    let n = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mobius_max_drift: f64 = 0.0;
    let mut monotonicity_violations = 0;
    let mut lower_bound_violations = 0;
    for _ in 0..n_samples {
        let k = rng.random_range(2..6);
        let boundary = random_finite_boundary(&mut rng, n, k);
        let g = DomainSpec::Finite { points: boundary.clone() };
        if g.validate().is_err() {
            continue;
        }
        let x = random_interior(&mut rng, n, &boundary);
        let y = random_interior(&mut rng, n, &boundary);
        let v = rho_g(&g, &x, &y)?;

        let ops = rng.random_range(1..=5);
        let f = MobiusMap::random(&mut rng, n, ops);
        if let (Some(fx), Some(fy), Ok(fg)) = (f.apply_finite(&x), f.apply_finite(&y), g.push_forward(&f)) {
            if fg.contains(&fx) && fg.contains(&fy) {
                let w = rho_g(&fg, &fx, &fy)?;
                mobius_max_drift = mobius_max_drift.max((w - v).abs() / v.max(f64::MIN_POSITIVE));
            }
        }

        // Dropping boundary points enlarges the domain.
        if boundary.len() > 2 {
            let bigger = DomainSpec::Finite { points: boundary[..2].to_vec() };
            if bigger.validate().is_ok() && rho_g(&bigger, &x, &y)? > v {
                monotonicity_violations += 1;
            }
        }
        if v < rho_g_lower_bound(&g, &x, &y)? {
            lower_bound_violations += 1;
        }
    }

    let ball = DomainSpec::unit_ball(n);
    let half = DomainSpec::upper_half_space(n);
    let mut pairs = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let bx = scale(&random_unit(&mut rng, n), 0.9 * rng.random::<f64>());
        let by = scale(&random_unit(&mut rng, n), 0.9 * rng.random::<f64>());
        let hp = |rng: &mut ChaCha8Rng| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.1..2.0)];
        let (hx, hy) = (hp(&mut rng), hp(&mut rng));
        pairs.push((bx, by, hx, hy));
    }
    let mut ball_max_deviation: f64 = 0.0;
    let mut half_space_max_deviation: f64 = 0.0;
    for (bx, by, hx, hy) in &pairs {
        ball_max_deviation = ball_max_deviation.max((rho_g(&ball, bx, by)? - hyperbolic_ball(bx, by)?).abs());
        half_space_max_deviation =
            half_space_max_deviation.max((rho_g(&half, hx, hy)? - hyperbolic_half_space(hx, hy)?).abs());
    }
    Ok(RhoGPropertiesReport {
        samples: n_samples,
        seed,
        mobius_max_drift,
        monotonicity_violations,
        lower_bound_violations,
        ball_max_deviation,
        half_space_max_deviation,
    })
}
