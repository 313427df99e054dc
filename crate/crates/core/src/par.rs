//! Switches between rayon data-parallel execution and a sequential fallback.
//!
//! With the `parallel` feature (default) the `parallel` argument selects the
//! rayon path; without it every call runs sequentially. All helpers are
//! order-preserving and reduction shapes are deterministic, so results do not
//! depend on thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `0..n` through `f`, preserving index order.
pub fn map_indexed<U, F>(n: usize, parallel: bool, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Maximum of `f(0..n)`; exact regardless of evaluation order.
pub fn fold_max<F>(n: usize, parallel: bool, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n)
            .into_par_iter()
            .map(&f)
            .reduce(|| f64::NEG_INFINITY, f64::max);
    }
    let _ = parallel;
    (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// Sum of `f(0..n)` with a fixed chunk shape: chunk partial sums are computed
/// (possibly in parallel) and combined in index order, so the floating-point
/// result is identical to the sequential pass.
pub fn sum_chunked<F>(n: usize, parallel: bool, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    const CHUNK: usize = 1 << 14;
    let chunks = n.div_ceil(CHUNK);
    let partial = |c: usize| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    };
    let parts: Vec<f64> = map_indexed(chunks, parallel && n > CHUNK, partial);
    parts.into_iter().sum()
}
