//! Index-ordered fan-out used by every multistart, scan and sweep.
//!
//! With the `parallel` feature the work is spread over the rayon pool;
//! without it the same closures run in a plain loop. Either way the output
//! vector is in index order, so reductions over it are deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Index of the smallest key; keys within `tie_tol` of the minimum go to the
/// lowest index.
pub fn argmin_with_ties(keys: &[f64], tie_tol: f64) -> Option<usize> {
    let best = keys.iter().copied().filter(|k| !k.is_nan()).fold(f64::INFINITY, f64::min);
    if !best.is_finite() && keys.iter().all(|k| k.is_nan() || k.is_infinite()) {
        return keys.iter().position(|k| *k == best);
    }
    keys.iter().position(|k| *k <= best + tie_tol)
}
