//! Sequential or data-parallel execution of independent work items.
//!
//! Results never depend on the mode: reductions are over integers or are
//! collected in index order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs
    /// sequentially.
    #[default]
    Parallel,
}

impl Execution {
    /// `f(0..n)` collected in index order.
    pub fn map_ordered<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Folds `f(0..n)` with an associative, commutative `combine`.
    pub fn map_reduce<T, F, C>(self, n: usize, identity: T, f: F, combine: C) -> T
    where
        T: Send + Sync + Clone,
        F: Fn(usize) -> T + Sync + Send,
        C: Fn(T, T) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n)
                    .into_par_iter()
                    .map(f)
                    .reduce(|| identity.clone(), &combine)
            }
            _ => (0..n).map(f).fold(identity, combine),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        for mode in [Execution::Sequential, Execution::Parallel] {
            assert_eq!(mode.map_ordered(5, |i| i * i), vec![0, 1, 4, 9, 16]);
            assert_eq!(mode.map_reduce(100, 0u64, |i| i as u64, |a, b| a + b), 4950);
        }
    }
}
