//! Switch between rayon and plain iterators.
//!
//! With the `parallel` feature (on by default) the helpers below fan work out
//! over the rayon pool; without it they degrade to the sequential iterator of
//! the same shape. Every caller reduces in index order, so results are
//! bit-identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..len` and collect in index order.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Map `f` over a slice and collect in order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Apply `f` to every fixed-width chunk of `data`, passing the chunk index.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if width == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(width)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(width)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
}

/// Run `f` with the helpers above confined to the calling thread: inside a
/// one-thread rayon pool with the `parallel` feature, directly without it.
pub fn sequential<R, F>(f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("one-thread pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}

/// Whether this build fans work out over rayon.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
