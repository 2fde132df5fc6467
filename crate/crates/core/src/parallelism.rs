//! Thread-count plumbing for the rayon-backed code paths.
//!
//! The `HULLPEEL_THREADS` environment variable caps parallelism: `1` forces
//! the sequential fallback even in a `parallel` build, any larger value is
//! used by [`configure_global_pool`] to size the global rayon pool.

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "HULLPEEL_THREADS";

/// Parsed value of `HULLPEEL_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
}

/// Whether data-parallel paths should be taken by default.
#[cfg(feature = "parallel")]
pub fn parallel_enabled() -> bool {
    thread_cap() != Some(1)
}

#[cfg(not(feature = "parallel"))]
pub fn parallel_enabled() -> bool {
    false
}

/// Sizes the global rayon pool from `HULLPEEL_THREADS`. Call once at process
/// start; later calls are no-ops because the pool can only be built once.
#[cfg(feature = "parallel")]
pub fn configure_global_pool() {
    if let Some(n) = thread_cap() {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn configure_global_pool() {}
