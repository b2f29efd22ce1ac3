//! Worker-pool configuration.

use std::sync::Once;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "RIESZLAB_THREADS";

static INIT: Once = Once::new();

/// Configures the global rayon pool from `RIESZLAB_THREADS` once. Later
/// calls, or an already initialized pool, are left alone.
pub fn init_from_env() {
    INIT.call_once(|| {
        if let Some(n) = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n > 0)
        {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}
