//! Execution mode for the data-parallel loops.
//!
//! Every parallel loop in the crate goes through [`Exec`]. Results are
//! assembled in index order and reductions only combine integer counts or
//! per-index values, so both modes produce bit-identical output.
//!
//! Without the `parallel` feature, [`Exec::Parallel`] runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Evaluate `f` on `0..n` and collect in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Send + Sync,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Fallible variant of [`Exec::map`]; the first error in index order wins.
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Send + Sync,
    {
        self.map(n, f).into_iter().collect()
    }

    /// Map `0..n` through `f` and fold the results with an associative `merge`.
    ///
    /// The fold always runs in index order over the collected partial
    /// results, so non-commutative or floating merges stay deterministic.
    pub fn map_fold<T, F, M>(self, n: usize, init: T, f: F, mut merge: M) -> T
    where
        T: Send,
        F: Fn(usize) -> T + Send + Sync,
        M: FnMut(T, T) -> T,
    {
        self.map(n, f).into_iter().fold(init, &mut merge)
    }
}
