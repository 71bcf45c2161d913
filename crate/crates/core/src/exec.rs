//! Sequential / data-parallel dispatch.
//!
//! Every parallel path has a sequential twin that produces identical
//! results: maps keep input order and sums use a fixed chunking with a
//! pairwise tree, so the reduction order never depends on thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Elements summed left-to-right inside one chunk before the pairwise tree.
pub const SUM_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when built with the `parallel` feature, otherwise falls
    /// back to [`Execution::Sequential`].
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Applies `f` to every item, returning results in input order.
pub fn map_ordered<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(&f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Sums `f(0) + … + f(len-1)` with a partition-independent order.
pub fn sum_indexed<F>(len: usize, exec: Execution, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = len.div_ceil(SUM_CHUNK);
    let chunk_sum = |c: usize| {
        let start = c * SUM_CHUNK;
        let end = (start + SUM_CHUNK).min(len);
        (start..end).map(&f).sum::<f64>()
    };
    let partials: Vec<f64> = {
        #[cfg(feature = "parallel")]
        {
            if exec.is_parallel() {
                (0..chunks).into_par_iter().map(chunk_sum).collect()
            } else {
                (0..chunks).map(chunk_sum).collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = exec;
            (0..chunks).map(chunk_sum).collect()
        }
    };
    pairwise(&partials)
}

fn pairwise(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise(lo) + pairwise(hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_is_bit_identical_across_modes() {
        let f = |i: usize| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (1.0 + i as f64);
        for len in [0, 1, 7, SUM_CHUNK, SUM_CHUNK + 1, 10 * SUM_CHUNK + 13] {
            let a = sum_indexed(len, Execution::Sequential, f);
            let b = sum_indexed(len, Execution::Parallel, f);
            assert_eq!(a.to_bits(), b.to_bits(), "len={len}");
        }
    }

    #[test]
    fn map_keeps_order() {
        let xs: Vec<u32> = (0..1000).collect();
        let seq = map_ordered(&xs, Execution::Sequential, |x| x * 3);
        let par = map_ordered(&xs, Execution::Parallel, |x| x * 3);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 2997);
    }
}
