//! Worker pool behind the core [`Executor`] contract.

use driftwalk_core::simulate::Executor;
use rayon::prelude::*;

use crate::error::CliError;

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "DRIFTWALK_THREADS";

/// Runs blocks on a rayon pool. Results come back in block order, so
/// estimates do not depend on the thread count.
pub struct Pooled {
    pool: rayon::ThreadPool,
}

impl Pooled {
    /// `None` or `Some(0)` lets rayon pick one thread per core.
    pub fn new(threads: Option<usize>) -> Result<Self, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
        Ok(Pooled { pool })
    }

    pub fn from_env() -> Result<Self, CliError> {
        let threads = match std::env::var(THREADS_VAR) {
            Ok(raw) => Some(
                raw.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("{THREADS_VAR} must be a nonnegative integer, got {raw:?}")))?,
            ),
            Err(_) => None,
        };
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pooled {
    fn map_blocks<T, F>(&self, blocks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let f = &f;
        self.pool.install(|| (0..blocks).into_par_iter().map(f).collect())
    }
}
