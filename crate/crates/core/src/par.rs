//! Row-parallel helpers.
//!
//! With the `parallel` feature (the default) rows are dispatched through
//! rayon; without it the same closures run sequentially. Every caller writes
//! into disjoint row slices or an index-addressed output, so results are
//! bit-identical either way and independent of the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Caps worker parallelism from the `WIGNER_LAB_THREADS` environment variable
/// (0 or unset = automatic). Without the `parallel` feature this is a no-op.
/// Call once at startup; later calls are ignored.
pub fn init_thread_pool_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("WIGNER_LAB_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n > 0 {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global();
                }
            }
        }
    }
}

/// Apply `f` to each `row_len` chunk of `data`, passing the chunk index.
pub(crate) fn for_each_row<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    debug_assert_eq!(data.len() % row_len, 0);
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// Collect `f(0..n)` into a vector, preserving index order.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
