use rayon::prelude::*;
use silt_core::asymptotics::ReplicaExecutor;

use crate::error::{LabError, LabResult};

/// Bounded worker pool. Results come back in index order whatever the pool
/// size, so every downstream fold is independent of scheduling.
pub struct PoolExecutor {
    pool: rayon::ThreadPool,
}

impl PoolExecutor {
    pub fn new(threads: usize) -> LabResult<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| LabError::config(format!("cannot start {threads} workers: {e}")))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl ReplicaExecutor for PoolExecutor {
    fn map_indexed<T, F>(&self, n: u64, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(task).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let ex = PoolExecutor::new(4).unwrap();
        assert_eq!(ex.threads(), 4);
        let v = ex.map_indexed(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == (i as u64) * (i as u64)));
    }
}
