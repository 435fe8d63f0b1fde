//! Data-parallel building blocks, rayon-backed when the `parallel` feature is
//! on (the default). The `_seq` twins are always sequential; they exist as
//! the fallback implementation and as the baseline for the bench suite.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Configures the global worker pool size. No-op when built without the
/// `parallel` feature or when a pool already exists.
pub fn configure_threads(jobs: usize) {
    #[cfg(feature = "parallel")]
    {
        if jobs > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
}

pub fn map_collect_seq<T, U>(items: &[T], f: impl Fn(&T) -> U) -> Vec<U> {
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_collect<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U>(items: &[T], f: impl Fn(&T) -> U) -> Vec<U> {
    map_collect_seq(items, f)
}

pub fn sum_indexed_seq(n: u64, f: impl Fn(u64) -> u64) -> u64 {
    (0..n).map(f).sum()
}

/// Sum of f(i) for i in 0..n; order-independent, so the parallel and
/// sequential results are identical.
#[cfg(feature = "parallel")]
pub fn sum_indexed(n: u64, f: impl Fn(u64) -> u64 + Sync + Send) -> u64 {
    (0..n).into_par_iter().map(f).sum()
}

#[cfg(not(feature = "parallel"))]
pub fn sum_indexed(n: u64, f: impl Fn(u64) -> u64) -> u64 {
    sum_indexed_seq(n, f)
}

pub fn find_map_first_seq<T, U>(items: &[T], f: impl Fn(&T) -> Option<U>) -> Option<U> {
    items.iter().find_map(f)
}

/// First Some(f(item)) in slice order (rayon's find_map_first preserves the
/// sequential answer, which keeps mismatch witnesses deterministic).
#[cfg(feature = "parallel")]
pub fn find_map_first<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(&T) -> Option<U> + Sync + Send,
) -> Option<U> {
    items.par_iter().find_map_first(f)
}

#[cfg(not(feature = "parallel"))]
pub fn find_map_first<T, U>(items: &[T], f: impl Fn(&T) -> Option<U>) -> Option<U> {
    find_map_first_seq(items, f)
}
