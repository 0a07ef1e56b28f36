//! Deterministic 1-D optimization and fitting helpers: seeded grids with
//! golden-section refinement, and ordinary least squares for slope fits.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Minimize `f` on `[a, b]`: coarse grid bracket, then golden-section.
pub fn grid_golden_min<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    grid: usize,
    iters: usize,
) -> Result<(f64, f64)> {
    if !(b > a) || grid < 3 {
        return Err(Error::invalid("need b > a and at least 3 grid points"));
    }
    let h = (b - a) / (grid - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..grid {
        let v = f(a + h * i as f64);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut lo = a + h * best_i.saturating_sub(1) as f64;
    let mut hi = (a + h * (best_i + 1) as f64).min(b);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 > f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    Ok(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}

/// Maximize `f` on `[a, b]` by minimizing its negative.
pub fn grid_golden_max<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    grid: usize,
    iters: usize,
) -> Result<(f64, f64)> {
    let (x, v) = grid_golden_min(|t| -f(t), a, b, grid, iters)?;
    Ok((x, -v))
}

/// Ordinary least-squares line through `(x, y)` pairs: `(slope, intercept)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("fit needs at least two matched points"));
    }
    let n = xs.len() as f64;
    let mx: f64 = xs.iter().sum::<f64>() / n;
    let my: f64 = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(Error::Internal("degenerate abscissa variance in fit".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Geometric grid of `n >= 2` points spanning `[lo, hi]`, both positive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(Error::invalid("geometric grid needs 0 < lo < hi and n >= 2"));
    }
    let step = math::ln(hi / lo) / (n - 1) as f64;
    Ok((0..n).map(|i| lo * math::exp(step * i as f64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, v) = grid_golden_min(|t| (t - 1.3) * (t - 1.3) + 2.0, 0.0, 4.0, 33, 60).unwrap();
        // abscissa accuracy near a quadratic minimum is sqrt(eps)-limited
        assert!((x - 1.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn fit_recovers_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let (m, b) = linear_fit(&xs, &ys).unwrap();
        assert!((m - 3.0).abs() < 1e-12);
        assert!((b + 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[2.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn geometric_grid_spans() {
        let g = geometric_grid(1e-4, 1.0, 5).unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1e-4).abs() < 1e-18);
        assert!((g[4] - 1.0).abs() < 1e-12);
        assert!((g[2] - 1e-2).abs() < 1e-14);
    }
}
