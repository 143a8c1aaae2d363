//! Worker-pool plumbing for the data-parallel hot paths.
//!
//! Candidate rollouts within one control step and episodes within a batch
//! are independent. With the `parallel` feature (default) they fan out over
//! a rayon pool; without it, or with `workers = 1`, everything runs on the
//! calling thread. Results always come back in input order, so the choice
//! of worker count never changes a result, only the wall time.

/// Execution context carrying the worker-pool configuration.
pub struct ExecContext {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl ExecContext {
    /// `workers = 0` uses the default pool width (one thread per core);
    /// `workers = 1` forces sequential execution; any other value builds a
    /// pool of exactly that many threads.
    pub fn new(workers: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            let pool = if workers > 1 {
                Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .build()
                        .expect("failed to build worker pool"),
                )
            } else {
                None
            };
            Self { workers, pool }
        }
        #[cfg(not(feature = "parallel"))]
        Self { workers }
    }

    /// Sequential context regardless of features.
    pub fn sequential() -> Self {
        Self::new(1)
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Map `f` over `items`, preserving order.
    pub fn map<T, U, F>(&self, items: Vec<T>, f: F) -> Vec<U>
    where
        T: Send,
        U: Send,
        F: Fn(T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            if self.workers != 1 {
                return match &self.pool {
                    Some(pool) => pool.install(|| items.into_par_iter().map(f).collect()),
                    None => items.into_par_iter().map(f).collect(),
                };
            }
        }
        items.into_iter().map(f).collect()
    }
}

impl Default for ExecContext {
    fn default() -> Self {
        Self::new(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        for workers in [0, 1, 2, 4] {
            let ctx = ExecContext::new(workers);
            let out = ctx.map((0..100).collect(), |i: i32| i * i);
            assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }
}
