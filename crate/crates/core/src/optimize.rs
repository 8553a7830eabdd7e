//! One-dimensional minimization: log-spaced grid bracketing plus golden-section refinement.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `rel_tol * max(|x|, tiny)`.
/// Returns `(x_min, f_min)`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..500 {
        let scale = x1.abs().max(x2.abs()).max(1e-300);
        if hi - lo <= rel_tol * scale {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `n` points log-spaced on `[lo, hi]`, both ends included. Requires `0 < lo < hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let mut pts: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    pts[0] = lo;
    pts[n - 1] = hi;
    pts
}

/// Result of a bracketed scan over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanMinimum {
    pub x: f64,
    pub value: f64,
    /// False when the grid minimum sits at an end of the grid, so the true
    /// infimum may lie outside the scanned range.
    pub interior: bool,
}

/// Minimize `f` over the sorted grid, then refine the bracketing cell by golden section.
pub fn scan_then_refine(f: impl Fn(f64) -> f64, grid: &[f64], rel_tol: f64) -> ScanMinimum {
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let (best, &best_val) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let last = grid.len() - 1;
    if best == 0 || best == last {
        return ScanMinimum {
            x: grid[best],
            value: best_val,
            interior: false,
        };
    }
    let (x, value) = golden_section(&f, grid[best - 1], grid[best + 1], rel_tol);
    if value <= best_val {
        ScanMinimum {
            x,
            value,
            interior: true,
        }
    } else {
        ScanMinimum {
            x: grid[best],
            value: best_val,
            interior: true,
        }
    }
}

/// Minimum of `f` on `[lo, hi]` from a dense grid (log-spaced where possible)
/// plus endpoint checks and golden refinement. Returns `(x, f(x))`.
pub fn minimize_on_interval(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let mut grid = if lo > 0.0 {
        log_grid(lo, hi, points)
    } else {
        let mut g = vec![lo];
        g.extend(log_grid(hi * 1e-12, hi, points - 1));
        g
    };
    grid.dedup();
    let m = scan_then_refine(&f, &grid, 1e-12);
    let mut best = (m.x, m.value);
    for x in [lo, hi] {
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_section(|x| (x - 1.7).powi(2) + 3.0, 0.0, 5.0, 1e-10);
        assert!((x - 1.7).abs() < 1e-7);
        assert!((fx - 3.0).abs() < 1e-12);
    }

    #[test]
    fn scan_flags_boundary_minimum() {
        let grid = log_grid(1e-3, 10.0, 50);
        let m = scan_then_refine(|x| (-x).exp(), &grid, 1e-8);
        assert!(!m.interior);
        assert_eq!(m.x, 10.0);
    }

    #[test]
    fn interval_minimum_handles_zero_endpoint() {
        let (x, v) = minimize_on_interval(|x| x * x - 0.5 * x, 0.0, 2.0, 1000);
        assert!((x - 0.25).abs() < 1e-6);
        assert!((v + 0.0625).abs() < 1e-12);
        let (x, _) = minimize_on_interval(|x| x, 0.0, 2.0, 100);
        assert_eq!(x, 0.0);
    }
}
