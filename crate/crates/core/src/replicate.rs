//! Independent replications, in parallel when the `parallel` feature is on.
//!
//! Replication `i` (zero based) of a run seeded with `seed` uses random
//! stream `i` of that seed, so results do not depend on how replications
//! are spread across threads.

use crate::env::Environment;

/// Environment for replication `i` of a run seeded with `seed`.
pub fn replication_env(seed: u64, i: usize) -> Environment {
    Environment::with_seed(seed).with_stream(i as u64)
}

/// Runs `f(0..n)` one after another.
pub fn replicate_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Runs `f(0..n)` on the global thread pool. Output order is by index.
#[cfg(feature = "parallel")]
pub fn replicate_par<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Runs `f(0..n)` with at most `jobs` threads (0 picks the default).
#[cfg(feature = "parallel")]
pub fn replicate<T, F>(n: usize, jobs: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    if jobs == 1 || n <= 1 {
        return replicate_seq(n, f);
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| replicate_par(n, f)),
        Err(_) => replicate_seq(n, f),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn replicate<T, F>(n: usize, _jobs: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    replicate_seq(n, f)
}
