//! Small dense-vector helpers on `&[f64]`.
//!
//! Points of ℝⁿ are plain slices; everything here is allocation-light and
//! dimension-agnostic.

use rand::Rng;
use rand_distr::StandardNormal;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm, scaled to avoid overflow and underflow.
pub fn norm(a: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = a.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], t: f64) -> Vec<f64> {
    a.iter().map(|x| x * t).collect()
}

/// `a + t·b`
pub fn axpy(a: &[f64], t: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    // Same scaling as `norm`, without the temporary.
    let scale = a
        .iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y) / scale;
            d * d
        })
        .sum();
    scale * s.sqrt()
}

pub fn basis(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Angle ∠x0y in [0, π], computed as 2·atan2(|x̂−ŷ|, |x̂+ŷ|).
///
/// Both points must be nonzero.
pub fn angle(x: &[f64], y: &[f64]) -> f64 {
    let nx = norm(x);
    let ny = norm(y);
    let u = scale(x, 1.0 / nx);
    let v = scale(y, 1.0 / ny);
    let d = dist(&u, &v);
    let s = norm(&add(&u, &v));
    2.0 * d.atan2(s)
}

/// Unit vector in the direction of `a` (returns `a` unchanged when zero).
pub fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    if n == 0.0 {
        a.to_vec()
    } else {
        scale(a, 1.0 / n)
    }
}

/// Some unit vector orthogonal to the unit vector `u` (`u.len() >= 2`).
pub fn orthogonal_unit(u: &[f64]) -> Vec<f64> {
    // Project the basis vector least aligned with u.
    let k = (0..u.len())
        .min_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs()))
        .unwrap_or(0);
    let e = basis(u.len(), k);
    let w = axpy(&e, -dot(&e, u), u);
    normalized(&w)
}

/// Orthonormal frame (e1, e2) of the 2-plane through 0, `a` and `b`.
///
/// `e1` is the direction of `a`; when `b` is parallel to `a` an arbitrary
/// orthogonal complement is chosen.
pub fn plane_frame(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let e1 = normalized(a);
    let w = axpy(b, -dot(b, &e1), &e1);
    let nw = norm(&w);
    let e2 = if nw > 1e-14 * norm(b).max(f64::MIN_POSITIVE) {
        scale(&w, 1.0 / nw)
    } else {
        orthogonal_unit(&e1)
    };
    (e1, e2)
}

/// Uniform direction on the unit sphere S^{n−1}.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let nv = norm(&v);
        if nv > 1e-12 {
            return scale(&v, 1.0 / nv);
        }
    }
}

/// Magnitude log-uniform on [lo, hi].
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let t: f64 = rng.random();
    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
}

/// Point with uniform direction and log-uniform magnitude in [lo, hi].
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let r = log_uniform(rng, lo, hi);
    scale(&random_unit(rng, n), r)
}

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], x))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Self { n, data }
    }

    /// Haar-ish random orthogonal matrix (Gram–Schmidt on Gaussian rows),
    /// including reflections.
    pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
        while rows.len() < n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            for r in &rows {
                let c = dot(&v, r);
                v = axpy(&v, -c, r);
            }
            let nv = norm(&v);
            if nv > 1e-8 {
                rows.push(scale(&v, 1.0 / nv));
            }
        }
        Self {
            n,
            data: rows.concat(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn angle_is_robust_near_collinear() {
        let x = [1.0, 1e-12];
        let y = [1.0, 0.0];
        assert!((angle(&x, &y) - 1e-12).abs() < 1e-20);
        assert!((angle(&[1.0, 0.0], &[-1.0, 0.0]) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = Matrix::random_orthogonal(&mut rng, 4);
        for i in 0..4 {
            for j in 0..4 {
                let d = dot(&q.data[i * 4..i * 4 + 4], &q.data[j * 4..j * 4 + 4]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plane_frame_handles_parallel_inputs() {
        let (e1, e2) = plane_frame(&[2.0, 0.0, 0.0], &[-3.0, 0.0, 0.0]);
        assert_eq!(e1, vec![1.0, 0.0, 0.0]);
        assert!(dot(&e1, &e2).abs() < 1e-15);
        assert!((norm(&e2) - 1.0).abs() < 1e-15);
    }
}
