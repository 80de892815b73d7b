//! Execution policy for the data-parallel loops (window sweeps, matrix
//! enumeration, restarts, corpus members).
//!
//! Every parallel reduction here is order-independent: minima are taken over
//! `(value, index)` pairs, so results never depend on the thread schedule.
//! Without the `parallel` feature, [`Execution::Parallel`] runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True if this policy will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Keeps the lower value; ties go to the lower index. NaN loses to everything.
#[inline]
pub(crate) fn better<T>(a: (f64, usize, T), b: (f64, usize, T)) -> (f64, usize, T) {
    use std::cmp::Ordering::*;
    let ord = match (a.0.is_nan(), b.0.is_nan()) {
        (true, false) => Greater,
        (false, true) => Less,
        _ => a.0.partial_cmp(&b.0).unwrap_or(Equal).then(a.1.cmp(&b.1)),
    };
    if ord == Greater {
        b
    } else {
        a
    }
}

/// Evaluates `f` on `0..n` and returns the minimizing `(value, index, payload)`.
pub(crate) fn argmin<T, F>(exec: Execution, n: usize, f: F) -> Option<(f64, usize, T)>
where
    T: Send,
    F: Fn(usize) -> (f64, T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n)
            .into_par_iter()
            .map(|i| {
                let (v, t) = f(i);
                (v, i, t)
            })
            .reduce_with(better);
    }
    let _ = exec;
    (0..n)
        .map(|i| {
            let (v, t) = f(i);
            (v, i, t)
        })
        .reduce(better)
}

/// Maps `f` over `0..n`, preserving order.
pub(crate) fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Smallest index in `0..n` satisfying `pred`.
pub(crate) fn find_first<F>(exec: Execution, n: u64, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().find_first(|&i| pred(i));
    }
    let _ = exec;
    (0..n).find(|&i| pred(i))
}
