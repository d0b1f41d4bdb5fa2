use chordkit_core::runner::ChunkExecutor;
use rayon::prelude::*;

/// Runs chunks on a dedicated rayon pool. Results come back in chunk
/// order, so output does not depend on the number of workers.
pub struct ThreadPool {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl ThreadPool {
    /// `workers == 0` picks the number of available cores.
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        let workers = pool.current_num_threads();
        Ok(Self { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl ChunkExecutor for ThreadPool {
    fn map_chunks<T, F>(&self, n_chunks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..n_chunks).into_par_iter().map(f).collect())
    }
}
