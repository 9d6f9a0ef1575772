//! Thread-pool executor for the Monte Carlo estimators.

use expou_core::PathExecutor;
use rayon::prelude::*;

/// Runs tasks on the global rayon pool. Results come back in task order, so
/// output does not depend on the thread count.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl PathExecutor for Rayon {
    fn run<T, F>(&self, n_tasks: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n_tasks).into_par_iter().map(task).collect()
    }
}
