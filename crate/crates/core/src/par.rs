//! Deterministic data-parallel loops.
//!
//! Work is cut into fixed-size chunks that do not depend on the number of
//! workers, each chunk folds its indices in order, and chunk results are
//! merged in chunk order. Floating-point results are therefore identical for
//! any thread count, including the sequential `no_std` build.

use alloc::vec::Vec;

use crate::error::Result;

/// Default number of walks per chunk.
pub const CHUNK: u64 = 256;

fn chunk_fold<A, I, B>(c: u64, n: u64, chunk: u64, init: &I, body: &B) -> Result<A>
where
    I: Fn() -> A,
    B: Fn(u64, &mut A) -> Result<()>,
{
    let mut acc = init();
    let hi = n.min((c + 1) * chunk);
    for i in c * chunk..hi {
        body(i, &mut acc)?;
    }
    Ok(acc)
}

/// Folds `body` over `0..n` and merges chunk accumulators in order.
pub fn fold<A, I, B, M>(n: u64, chunk: u64, init: I, body: B, mut merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    B: Fn(u64, &mut A) -> Result<()> + Sync + Send,
    M: FnMut(&mut A, A),
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    let parts = run_chunks(chunks, n, chunk, &init, &body)?;
    let mut total = init();
    for p in parts {
        merge(&mut total, p);
    }
    Ok(total)
}

#[cfg(feature = "std")]
fn run_chunks<A, I, B>(chunks: u64, n: u64, chunk: u64, init: &I, body: &B) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    B: Fn(u64, &mut A) -> Result<()> + Sync + Send,
{
    use rayon::prelude::*;
    (0..chunks).into_par_iter().map(|c| chunk_fold(c, n, chunk, init, body)).collect()
}

#[cfg(not(feature = "std"))]
fn run_chunks<A, I, B>(chunks: u64, n: u64, chunk: u64, init: &I, body: &B) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    B: Fn(u64, &mut A) -> Result<()> + Sync + Send,
{
    (0..chunks).map(|c| chunk_fold(c, n, chunk, init, body)).collect()
}

/// Evaluates `f` at every index in `0..n`, in parallel, keeping order.
pub fn map<U, F>(n: u64, f: F) -> Result<Vec<U>>
where
    U: Send,
    F: Fn(u64) -> Result<U> + Sync + Send,
{
    #[cfg(feature = "std")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "std"))]
    {
        (0..n).map(f).collect()
    }
}
