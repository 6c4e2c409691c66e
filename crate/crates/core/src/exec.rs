//! Index-ordered parallel map with a sequential fallback.
//!
//! Results land in a slot chosen by their input index, so the output never
//! depends on scheduling. Without the `parallel` feature every call runs on
//! the calling thread.

/// How many workers to use for a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Run on the calling thread.
    Sequential,
    /// Let the runtime pick the worker count.
    #[default]
    Auto,
    /// Cap the pool at this many workers.
    Threads(usize),
}

impl ExecMode {
    /// `0` means automatic, `1` sequential.
    pub fn from_threads(n: usize) -> Self {
        match n {
            0 => ExecMode::Auto,
            1 => ExecMode::Sequential,
            n => ExecMode::Threads(n),
        }
    }
}

/// Whether this build can run work on more than one thread.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// `(0..n).map(f)` collected in index order, possibly on several threads.
pub fn map_indexed<T, F>(n: usize, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
        match mode {
            ExecMode::Sequential => (0..n).map(&f).collect(),
            ExecMode::Auto => run(),
            ExecMode::Threads(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                Ok(pool) => pool.install(run),
                // Pool creation only fails on resource exhaustion; the global
                // pool still produces identical results.
                Err(_) => run(),
            },
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = mode;
        (0..n).map(f).collect()
    }
}
