//! Block-level fan-out. With the `parallel` feature, [`Execution::Parallel`]
//! runs on the current rayon pool; without it, every mode runs sequentially.

use std::ops::Range;

/// How independent Monte-Carlo blocks are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Serial
        }
    }
}

/// Ordered map over `blocks` with per-worker state from `init`.
pub(crate) fn map_blocks<S, T, I, F>(exec: Execution, blocks: Range<u64>, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            blocks.into_par_iter().map_init(init, |s, b| f(s, b)).collect()
        }
        _ => {
            let mut state = init();
            blocks.map(|b| f(&mut state, b)).collect()
        }
    }
}

/// Fold over `blocks` into per-worker accumulators, merged with `reduce`.
/// `reduce` must be associative and commutative for worker-independent results.
pub(crate) fn fold_blocks<S, A, I, F, R>(
    exec: Execution,
    blocks: Range<u64>,
    init: I,
    fold: F,
    reduce: R,
) -> A
where
    S: Send,
    A: Send,
    I: Fn() -> (S, A) + Sync + Send,
    F: Fn(&mut S, &mut A, u64) + Sync + Send,
    R: Fn(A, A) -> A + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            blocks
                .into_par_iter()
                .fold(&init, |(mut s, mut acc), b| {
                    fold(&mut s, &mut acc, b);
                    (s, acc)
                })
                .map(|(_, acc)| acc)
                .reduce_with(&reduce)
                .unwrap_or_else(|| init().1)
        }
        _ => {
            let _ = &reduce;
            let (mut s, mut acc) = init();
            for b in blocks {
                fold(&mut s, &mut acc, b);
            }
            acc
        }
    }
}
