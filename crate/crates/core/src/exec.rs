//! Sequential or rayon-backed evaluation of independent work items.
//!
//! Results are always collected in index order, so both paths produce
//! identical output. Without the `parallel` feature, [`Execution::Parallel`]
//! runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Reduce `f(i)` over `0..len` with an associative `combine`.
    pub fn map_reduce<T, F, I, C>(self, len: usize, identity: I, f: F, combine: C) -> T
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
        I: Fn() -> T + Sync + Send,
        C: Fn(T, T) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..len).into_par_iter().map(f).reduce(identity, combine);
        }
        (0..len).map(f).fold(identity(), combine)
    }
}
