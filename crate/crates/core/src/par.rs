//! Data-parallel helpers with a sequential fallback.
//!
//! Everything here is deterministic regardless of thread count: parallel maps
//! collect in index order and reductions combine fixed-size chunk results in
//! chunk order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk width for deterministic chunked reductions.
pub(crate) const CHUNK: usize = 4096;

/// Map `f` over `0..n`, returning results in index order.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Evaluate `f` on each fixed-width chunk of `0..n` (possibly in parallel)
/// and hand the per-chunk results to `combine` in chunk order.
pub(crate) fn chunked_reduce<T, F, C, R>(n: usize, f: F, combine: C) -> R
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync,
    C: FnOnce(Vec<T>) -> R,
{
    let chunks = n.div_ceil(CHUNK).max(1);
    let parts = map_indexed(chunks, |c| {
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK).min(n);
        f(lo..hi)
    });
    combine(parts)
}
