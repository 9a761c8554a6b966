//! Thin switch between rayon and sequential iteration.
//!
//! The `parallel` feature (on by default) routes the closures below through
//! rayon; without it the same helpers run on plain iterators, so every
//! computation is available in a dependency-free sequential build.

#[cfg(feature = "parallel")]
pub(crate) fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    // coarse splits: the per-item closures here are usually cheap relative
    // to rayon's task overhead
    items.into_par_iter().with_min_len(32).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Map over an index range, preserving order.
pub(crate) fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    map_collect((0..n).collect::<Vec<_>>(), f)
}
