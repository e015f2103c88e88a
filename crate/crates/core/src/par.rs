//! Indexed map helpers for embarrassingly parallel batch work.
//!
//! With the default `parallel` feature the maps fan out through rayon;
//! without it they degrade to sequential loops with the same signature.
//! Output order is by index either way, so results are deterministic and
//! the two paths are interchangeable. [`map_indexed_seq`] is always
//! sequential and exists so benchmarks can compare the paths directly.

/// Map `f` over `0..n`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n` (sequential build).
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Sequential indexed map, available under every feature combination.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
