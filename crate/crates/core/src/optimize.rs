//! One-dimensional maximization: uniform scan, then golden-section refinement.

use crate::exec::{self, Execution};

pub const DEFAULT_SCAN: usize = 1024;
/// Width at which golden-section refinement stops.
pub const X_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub grid_size: usize,
    pub refinements: usize,
}

/// Maximizes `f` on `[lo, hi]`.
///
/// `extra` points (kinks of the objective, say) are evaluated alongside the
/// scan. NaN values count as `-inf`. The scan runs under `exec`; the result
/// does not depend on the schedule.
pub fn maximize<F>(f: F, lo: f64, hi: f64, grid: usize, extra: &[f64], exec: Execution) -> Maximum
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let n = grid.max(3);
    let mut xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    xs.extend(extra.iter().copied().filter(|x| *x >= lo && *x <= hi));
    let vals = exec::map(exec, &xs, |&x| clean(f(x)));
    let i = exec::argmax(&vals).unwrap_or(0);
    let mut best = Maximum {
        x: xs[i],
        value: vals[i],
        grid_size: xs.len(),
        refinements: 0,
    };

    let step = (hi - lo) / (n - 1) as f64;
    let (mut a, mut b) = ((best.x - step).max(lo), (best.x + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (clean(f(c)), clean(f(d)));
    while b - a > X_TOL && best.refinements < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = clean(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = clean(f(d));
        }
        best.refinements += 1;
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.value {
            best.x = x;
            best.value = v;
        }
    }
    best
}

fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_peak() {
        let m = maximize(|x| -(x - 0.3141).powi(2), 0.0, 1.0, 64, &[], Execution::Sequential);
        assert!((m.x - 0.3141).abs() < 1e-8);
        assert!(m.refinements > 10);
    }

    #[test]
    fn kink_at_extra_point() {
        let f = |x: f64| if x < 0.7 { x } else { 1.4 - x };
        let m = maximize(f, 0.0, 1.0, 16, &[0.7], Execution::Sequential);
        assert!((m.value - 0.7).abs() < 1e-12);
    }

    #[test]
    fn schedule_does_not_matter() {
        let f = |x: f64| (7.0 * x).sin() * x;
        let a = maximize(f, 0.0, 1.0, 1024, &[], Execution::Sequential);
        let b = maximize(f, 0.0, 1.0, 1024, &[], Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn nan_is_ignored() {
        let m = maximize(|x| if x < 0.5 { f64::NAN } else { 1.0 - x }, 0.0, 1.0, 11, &[], Execution::Auto);
        assert!((m.x - 0.5).abs() < 1e-9);
    }
}
