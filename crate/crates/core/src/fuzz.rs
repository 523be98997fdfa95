//! Randomized triangle-inequality campaigns.
//!
//! Campaigns are split into fixed-size blocks. Block `b` draws from a
//! ChaCha8 stream seeded with the campaign seed and stream id `b`, so the
//! result depends only on `(seed, n_samples)` and not on thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const BLOCK: usize = 4096;

/// Result of a triangle-inequality campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    /// Number of triples evaluated.
    pub samples: usize,
    /// Largest `d(x,y) − d(x,z) − d(z,y)` over all triples and rotations.
    pub worst_violation: f64,
    /// Largest violation divided by the triple's largest pairwise distance.
    pub worst_relative: f64,
    /// Triple attaining `worst_relative`, present iff `worst_violation > 0`.
    pub witness: Option<[Vec<f64>; 3]>,
    pub seed: u64,
}

impl FuzzReport {
    /// No triple violated the inequality by more than `rel_tol` times its scale.
    pub fn passes(&self, rel_tol: f64) -> bool {
        self.worst_relative <= rel_tol
    }
}

/// Violation of the triangle inequality at `(x, y, z)`, maximized over the
/// three rotations, together with the largest finite pairwise distance.
pub fn triangle_violation<D>(d: &D, x: &[f64], y: &[f64], z: &[f64]) -> (f64, f64)
where
    D: Fn(&[f64], &[f64]) -> f64 + ?Sized,
{
    let dxy = d(x, y);
    let dxz = d(x, z);
    let dzy = d(z, y);
    let excess = |long: f64, a: f64, b: f64| {
        let rhs = a + b;
        if long.is_infinite() && rhs.is_infinite() {
            0.0
        } else {
            long - rhs
        }
    };
    let v = excess(dxy, dxz, dzy)
        .max(excess(dxz, dxy, dzy))
        .max(excess(dzy, dxy, dxz));
    let scale = [dxy, dxz, dzy]
        .into_iter()
        .filter(|t| t.is_finite())
        .fold(0.0_f64, f64::max);
    (v, scale)
}

struct BlockResult {
    worst_violation: f64,
    worst_relative: f64,
    witness: Option<[Vec<f64>; 3]>,
}

fn relative(v: f64, scale: f64) -> f64 {
    if v <= 0.0 {
        v
    } else if v.is_infinite() || scale == 0.0 {
        f64::INFINITY
    } else {
        v / scale
    }
}

/// Runs `n_samples` random triples from `sampler` through `metric`.
pub fn triangle_fuzz<D, S>(metric: D, sampler: S, n_samples: usize, seed: u64) -> FuzzReport
where
    D: Fn(&[f64], &[f64]) -> f64 + Sync,
    S: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    let sampler = |rng: &mut ChaCha8Rng| -> [Vec<f64>; 3] { [sampler(rng), sampler(rng), sampler(rng)] };
    fuzz_triples(metric, sampler, n_samples, seed)
}

/// Like [`triangle_fuzz`] but the sampler produces whole triples.
pub fn fuzz_triples<D, S>(metric: D, sampler: S, n_samples: usize, seed: u64) -> FuzzReport
where
    D: Fn(&[f64], &[f64]) -> f64 + Sync,
    S: Fn(&mut ChaCha8Rng) -> [Vec<f64>; 3] + Sync,
{
    let blocks = n_samples.div_ceil(BLOCK);
    let results: Vec<BlockResult> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = BLOCK.min(n_samples - b * BLOCK);
            let mut out = BlockResult {
                worst_violation: f64::NEG_INFINITY,
                worst_relative: f64::NEG_INFINITY,
                witness: None,
            };
            for _ in 0..count {
                let [x, y, z] = sampler(&mut rng);
                let (v, scale) = triangle_violation(&metric, &x, &y, &z);
                let rel = relative(v, scale);
                out.worst_violation = out.worst_violation.max(v);
                if rel > out.worst_relative {
                    out.worst_relative = rel;
                    if v > 0.0 {
                        out.witness = Some([x, y, z]);
                    }
                }
            }
            out
        })
        .collect();

    let mut report = FuzzReport {
        samples: n_samples,
        worst_violation: f64::NEG_INFINITY,
        worst_relative: f64::NEG_INFINITY,
        witness: None,
        seed,
    };
    for r in results {
        report.worst_violation = report.worst_violation.max(r.worst_violation);
        if r.worst_relative > report.worst_relative {
            report.worst_relative = r.worst_relative;
            report.witness = r.witness;
        }
    }
    if report.worst_violation <= 0.0 {
        report.witness = None;
    }
    report
}
