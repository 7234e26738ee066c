use std::sync::OnceLock;

use rayon::{ThreadPool, ThreadPoolBuilder};

/// Caps solver parallelism. Unset or `0` lets rayon pick.
pub const THREADS_ENV: &str = "THERMOSTAT_DP_THREADS";

pub(crate) fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(0);
        ThreadPoolBuilder::new()
            .num_threads(threads)
            .thread_name(|i| format!("thermostat-dp-{i}"))
            .build()
            .expect("failed to start solver thread pool")
    })
}

pub(crate) fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool().install(f)
}
