//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers run on the current rayon pool; without it
//! they run in a plain loop. Both paths return results in index order, so callers
//! that reduce the returned vector sequentially get bit-identical output either way.

/// Evaluates `f(i)` for `i in 0..len` and returns the results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}

/// Splits `0..len` into fixed-size chunks, evaluates `f(range)` per chunk and returns
/// the chunk results in order. Chunk boundaries depend only on `len` and `chunk`,
/// never on the thread count.
pub fn map_chunks<T, F>(len: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let count = len.div_ceil(chunk);
    map_indexed(count, |c| {
        let lo = c * chunk;
        f(lo..(lo + chunk).min(len))
    })
}

/// Number of worker threads the helpers will use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
