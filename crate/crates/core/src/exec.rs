//! Data-parallel execution helpers.
//!
//! Every parallel loop in the crate goes through [`Execution`]. With the
//! `parallel` feature (default) the `Parallel` variant runs on rayon; without
//! it both variants run sequentially and produce identical results, since all
//! reductions used here are order-independent.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `Parallel` when the crate was built with rayon, otherwise `Sequential`.
    pub fn effective(self) -> Execution {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }

    /// Maps `f` over `0..len` and collects in index order.
    pub fn map_collect<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self.effective() {
            Execution::Sequential => (0..len).map(f).collect(),
            Execution::Parallel => par::map_collect(len, f),
        }
    }

    /// Maps `f` over `0..len` and folds with an associative, commutative `combine`.
    pub fn map_reduce<T, F, C>(self, len: usize, identity: T, f: F, combine: C) -> T
    where
        T: Send + Sync + Clone,
        F: Fn(usize) -> T + Sync + Send,
        C: Fn(T, T) -> T + Sync + Send,
    {
        match self.effective() {
            Execution::Sequential => (0..len).map(f).fold(identity, &combine),
            Execution::Parallel => par::map_reduce(len, identity, f, combine),
        }
    }
}

/// Worker count requested through `TREESIC_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("TREESIC_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0)
}

/// Installs the global rayon pool sized from `TREESIC_THREADS`. No-op without
/// the `parallel` feature or when the variable is unset.
pub fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads_from_env() {
        // build_global fails only if a pool already exists; that one wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(feature = "parallel")]
mod par {
    use rayon::prelude::*;

    pub fn map_collect<T, F>(len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).into_par_iter().map(f).collect()
    }

    pub fn map_reduce<T, F, C>(len: usize, identity: T, f: F, combine: C) -> T
    where
        T: Send + Sync + Clone,
        F: Fn(usize) -> T + Sync + Send,
        C: Fn(T, T) -> T + Sync + Send,
    {
        (0..len).into_par_iter().map(f).reduce(|| identity.clone(), combine)
    }
}

#[cfg(not(feature = "parallel"))]
mod par {
    pub fn map_collect<T, F>(len: usize, f: F) -> Vec<T>
    where
        F: Fn(usize) -> T,
    {
        (0..len).map(f).collect()
    }

    pub fn map_reduce<T, F, C>(len: usize, identity: T, f: F, combine: C) -> T
    where
        F: Fn(usize) -> T,
        C: Fn(T, T) -> T,
    {
        (0..len).map(f).fold(identity, combine)
    }
}
