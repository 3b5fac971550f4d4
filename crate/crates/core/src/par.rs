//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper partitions work by output index, so each output element is
//! produced by the same sequential code no matter how many threads run. That
//! keeps results bit-identical between the `parallel` build, a one-thread
//! pool and the sequential build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Environment variable capping the worker count used by [`with_env_threads`].
pub const THREADS_ENV: &str = "SASFORGE_THREADS";

/// Calls `f(i, chunk)` for every `chunk_len`-sized chunk of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if chunk_len == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c));
}

/// Evaluates `f` over `0..n` and collects the results in index order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
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

/// Runs `f` on a pool of exactly `threads` workers (sequentially without the
/// `parallel` feature). `threads == 0` means the global default pool.
pub fn with_threads<R, F>(threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            return f();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Thread cap from `SASFORGE_THREADS`, or 0 (default pool) when unset or invalid.
pub fn env_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// [`with_threads`] using the `SASFORGE_THREADS` cap.
pub fn with_env_threads<R, F>(f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    with_threads(env_threads(), f)
}

/// Number of workers the current pool would use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
