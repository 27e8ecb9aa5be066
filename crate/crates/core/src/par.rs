//! Data-parallel helpers.
//!
//! With the `parallel` feature the maps below run on rayon; without it they are
//! plain iterator maps. Results are always collected in index order and every
//! reduction is done sequentially afterwards, so outputs are bitwise identical
//! whichever path runs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Runtime choice of execution strategy, mainly for benchmarking the two paths
/// against each other inside one binary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    /// Use the thread pool if the `parallel` feature is enabled.
    #[default]
    Auto,
    /// Force a single thread.
    Sequential,
}

/// Runs `f` under the requested execution strategy.
pub fn run_with<R: Send>(exec: Execution, f: impl FnOnce() -> R + Send) -> R {
    match exec {
        Execution::Auto => f(),
        Execution::Sequential => sequential(f),
    }
}

#[cfg(feature = "parallel")]
fn sequential<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    use std::sync::OnceLock;
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("single-thread pool")).install(f)
}

#[cfg(not(feature = "parallel"))]
fn sequential<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    f()
}

/// Maps `f` over `0..n`, preserving order.
#[cfg(feature = "parallel")]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, preserving order.
#[cfg(feature = "parallel")]
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Fallible variant of [`map_range`]; the first error in index order wins.
pub fn try_map_range<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_range(n, f).into_iter().collect()
}

/// Fallible variant of [`map_slice`]; the first error in slice order wins.
pub fn try_map_slice<S, T, E, F>(items: &[S], f: F) -> Result<Vec<T>, E>
where
    S: Sync,
    T: Send,
    E: Send,
    F: Fn(&S) -> Result<T, E> + Sync + Send,
{
    map_slice(items, f).into_iter().collect()
}
