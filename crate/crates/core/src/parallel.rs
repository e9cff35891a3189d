//! Data-parallel driver helpers.
//!
//! With the `parallel` feature (default) the loops below fan out through
//! rayon; without it they run sequentially with identical results. Every
//! reduction used here is order-independent (elementwise max, disjoint
//! writes), so outputs do not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..len` and collect the results in index order.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
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

/// Always-sequential twin of [`map_indexed`], kept callable from benches so
/// the parallel and sequential paths can be compared in one build.
pub fn map_indexed_seq<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}

/// Fold `f(i)` fields into an elementwise maximum. `f` must return a vector
/// of length `width`; the reduction is commutative so scheduling does not
/// affect the result.
pub fn max_fields<F>(len: usize, width: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len)
            .into_par_iter()
            .map(f)
            .reduce(|| vec![f64::NEG_INFINITY; width], max_combine)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len)
            .map(f)
            .fold(vec![f64::NEG_INFINITY; width], max_combine)
    }
}

/// Sequential twin of [`max_fields`] for benchmarking.
pub fn max_fields_seq<F>(len: usize, width: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> Vec<f64>,
{
    (0..len)
        .map(f)
        .fold(vec![f64::NEG_INFINITY; width], max_combine)
}

fn max_combine(mut acc: Vec<f64>, next: Vec<f64>) -> Vec<f64> {
    for (a, b) in acc.iter_mut().zip(next.iter()) {
        if *b > *a {
            *a = *b;
        }
    }
    acc
}

/// Total over `0..len` of a per-index count, used by sampling verifiers.
pub fn sum_counts<F>(len: usize, f: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).sum()
    }
}

/// Mutate equal chunks of `data` in parallel. Chunks are disjoint, so the
/// result is identical to the sequential pass.
pub fn for_each_chunk<F>(data: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}
