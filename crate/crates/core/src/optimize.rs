//! One-dimensional maximization.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`,
/// stopping once the bracket is narrower than `width`.
///
/// Returns the best abscissa seen and its value.
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64, width: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while (b - a).abs() > width && iterations < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let (fa, fb) = (f(a), f(b));
    [(c, fc), (d, fd), (a, fa), (b, fb)]
        .into_iter()
        .filter(|(_, v)| !v.is_nan())
        .fold((c, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Maximize over a grid, then polish the best cell by golden section.
/// `grid` must be sorted.
pub fn grid_then_golden<F>(f: F, grid: &[f64], width: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let (i, _) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let polished = golden_max(&f, lo, hi, width);
    if polished.1 >= values[i] {
        polished
    } else {
        (grid[i], values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        let (x, v) = golden_max(|t| -(t - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn endpoint_maximum() {
        let (x, v) = golden_max(|t| t, 0.0, 1.0, 1e-10);
        assert_eq!((x, v), (1.0, 1.0));
    }

    #[test]
    fn grid_polish() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 10.0).collect();
        let (x, _) = grid_then_golden(|t: f64| -(t - 3.14159).powi(2), &grid, 1e-12);
        assert!((x - 3.14159).abs() < 1e-7, "{x}");
    }
}
