//! Realization-level work distribution.
//!
//! With the `parallel` feature, independent work units run on a rayon pool;
//! without it (or with [`Workers::Sequential`]) they run in order on the
//! calling thread. Results always come back in index order, so any
//! reduction performed over them afterwards is worker-count independent.

use crate::error::Result;

/// Degree of parallelism for ensemble runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// One thread, plain iterator.
    Sequential,
    /// A dedicated pool of this many threads.
    Threads(usize),
    /// The global pool (all available processors).
    #[default]
    Auto,
}

impl Workers {
    /// `0` means automatic, `1` sequential.
    pub fn from_count(n: usize) -> Self {
        match n {
            0 => Workers::Auto,
            1 => Workers::Sequential,
            n => Workers::Threads(n),
        }
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, workers: Workers, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match workers {
        Workers::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Workers::Auto => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        #[cfg(feature = "parallel")]
        Workers::Threads(threads) => {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| crate::error::invalid("workers", e.to_string()))?;
            pool.install(|| (0..n).into_par_iter().map(f).collect())
        }
        #[cfg(not(feature = "parallel"))]
        _ => (0..n).map(f).collect(),
    }
}
