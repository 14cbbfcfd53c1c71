//! Rayon-backed [`Executor`]. Results come back in index order, and the core
//! reduces them pairwise, so the worker count never changes a number.

use rayon::prelude::*;
use wgl_core::exec::Executor;

use crate::error::{CliError, Result};

pub struct Pool {
    inner: rayon::ThreadPool,
    threads: usize,
}

impl Pool {
    pub fn new(threads: usize) -> Result<Self> {
        let threads = threads.max(1);
        let inner = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Pool(e.to_string()))?;
        Ok(Self { inner, threads })
    }

    /// Worker count from `WGL_THREADS`, else the available parallelism.
    pub fn from_env() -> Result<Self> {
        let threads = match std::env::var("WGL_THREADS") {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::Schema(format!("WGL_THREADS must be a positive integer, got {v:?}")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.threads
    }
}

impl Executor for Pool {
    fn map<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync,
    {
        if self.threads == 1 {
            return (0..count).map(f).collect();
        }
        let f = &f;
        self.inner.install(|| (0..count).into_par_iter().map(f).collect())
    }
}
