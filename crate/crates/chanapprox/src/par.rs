//! Order-preserving map helpers backed by rayon when the `parallel` feature
//! is enabled and by plain iteration otherwise. Results are independent of
//! the schedule either way, so outputs are identical across both builds.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over a slice, preserving order.
#[cfg(feature = "parallel")]
pub fn map_collect<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, R, F: Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Map over `0..n`, preserving index order.
#[cfg(feature = "parallel")]
pub fn map_range<R: Send, F: Fn(usize) -> R + Sync + Send>(n: usize, f: F) -> Vec<R> {
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F: Fn(usize) -> R>(n: usize, f: F) -> Vec<R> {
    (0..n).map(f).collect()
}

/// Fold every index chunk of a fixed width and combine the per-chunk values
/// in chunk order. The chunk width is constant, so the grouping (and hence
/// any floating-point result) does not depend on thread count.
pub fn fold_chunks<R, F, G>(n: usize, chunk: usize, per_chunk: F, combine: G) -> Option<R>
where
    R: Send,
    F: Fn(std::ops::Range<usize>) -> R + Sync,
    G: Fn(R, R) -> R,
{
    assert!(chunk > 0);
    let ranges: Vec<_> = (0..n)
        .step_by(chunk)
        .map(|start| start..(start + chunk).min(n))
        .collect();
    let parts = map_collect(&ranges, |r| per_chunk(r.clone()));
    parts.into_iter().reduce(combine)
}
