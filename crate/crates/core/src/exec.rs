//! Index-parallel map with a sequential fallback.
//!
//! Checks and samplers generate inputs sequentially from a seeded RNG and
//! then evaluate them per index; the evaluation is the only parallel part, so
//! results are identical (and identically ordered) on both paths.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates f on 0..n, parallel when the `parallel` feature is on.
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

/// Always-sequential variant.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: FnMut(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Dispatches between the two at runtime; benches use this to compare the
/// schedulers on identical work.
pub fn map_indexed_opt<T, F>(n: usize, force_sequential: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if force_sequential {
        map_indexed_seq(n, f)
    } else {
        map_indexed(n, f)
    }
}
