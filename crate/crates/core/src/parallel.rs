//! Data-parallel map over independent work items.
//!
//! With the `parallel` feature the items run on rayon's pool; without it they
//! run in order on the calling thread. Results are always returned in index
//! order.

#[cfg(feature = "parallel")]
use crate::error::Error;
use crate::error::Result;

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    map_sequential(n, f)
}

pub(crate) fn map_sequential<R, F: Fn(usize) -> R>(n: usize, f: F) -> Vec<R> {
    (0..n).map(f).collect()
}

/// Run `job` with `workers` threads available to [`map_indexed`].
///
/// `workers = 0` uses the global pool. Without the `parallel` feature the
/// worker count is ignored.
#[cfg(feature = "parallel")]
pub(crate) fn with_workers<R: Send>(workers: usize, job: impl FnOnce() -> R + Send) -> Result<R> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(job))
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn with_workers<R: Send>(_workers: usize, job: impl FnOnce() -> R + Send) -> Result<R> {
    Ok(job())
}

/// True when the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
