//! Parallel replication runner on a rayon pool.

use betachart_core::arl::ReplicationRunner;
use rayon::prelude::*;

/// Runs replications on rayon workers. Results keep replication order, so
/// the worker count never changes the output.
pub struct Rayon {
    pool: Option<rayon::ThreadPool>,
}

impl Rayon {
    /// `threads = None` uses the global pool.
    pub fn new(threads: Option<usize>) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = match threads {
            Some(t) => Some(rayon::ThreadPoolBuilder::new().num_threads(t).build()?),
            None => None,
        };
        Ok(Self { pool })
    }
}

impl ReplicationRunner for Rayon {
    fn map<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        let run = || (0..count).into_par_iter().map(&f).collect();
        match &self.pool {
            Some(p) => p.install(run),
            None => run(),
        }
    }
}
