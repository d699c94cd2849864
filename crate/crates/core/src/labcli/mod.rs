//! Experiment harness behind the `polyrep` binary.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod report;

pub use config::{admissible_h_window, ExperimentConfig};
pub use experiments::{
    prepare_table, run_average, run_decomposition, run_kernel_check, run_l2_scaling,
    run_tolev_scaling, sieve_to_file,
};
pub use plot::emit_plots;
pub use report::Report;

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "POLYREP_THREADS";

/// Thread count: `POLYREP_THREADS` when set, else the configured value,
/// where 0 means one per core.
pub fn thread_count(configured: usize) -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} = {v:?} is not a thread count"))),
        Err(_) => Ok(configured),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
