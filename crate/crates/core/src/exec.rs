//! Data-parallel evaluation with a sequential fallback.
//!
//! Every parallel map in the crate goes through [`map`], which keeps output
//! order equal to input order so that reductions are independent of the
//! thread schedule. Without the `parallel` feature all modes run sequentially.

/// How independent evaluations are scheduled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    /// Parallel when the `parallel` feature is enabled, sequential otherwise.
    #[default]
    Auto,
    Sequential,
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && !matches!(self, Execution::Sequential)
    }
}

/// Applies `f` to every item, preserving order.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Index of the largest value; ties resolve to the lowest index, NaN never wins.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some(j) if values[j] >= *v => {}
            _ => best = Some(i),
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_in_every_mode() {
        let xs: Vec<u64> = (0..1000).collect();
        for exec in [Execution::Auto, Execution::Sequential, Execution::Parallel] {
            let ys = map(exec, &xs, |x| x * x);
            assert!(ys.iter().enumerate().all(|(i, y)| *y == (i as u64).pow(2)));
        }
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, f64::NAN]), Some(1));
        assert_eq!(argmax(&[f64::NAN]), None);
        assert_eq!(argmax(&[]), None);
    }
}
