//! Execution strategy for embarrassingly parallel Monte Carlo work.
//!
//! Work is always split into chunks whose boundaries depend only on the
//! problem size, and chunk results are folded in chunk order. An executor only
//! decides *where* chunks run, so every executor produces bit-identical output.

use alloc::vec::Vec;

/// Samples per work chunk.
pub const CHUNK: usize = 1024;

pub trait Executor: Sync {
    /// Evaluates `job(0..count)` and returns the results in index order.
    fn map<R, F>(&self, count: usize, job: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync;
}

/// Runs every chunk on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<R, F>(&self, count: usize, job: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync,
    {
        (0..count).map(job).collect()
    }
}

/// Number of chunks covering `n` items.
pub fn chunk_count(n: u64) -> usize {
    n.div_ceil(CHUNK as u64) as usize
}

/// Item range `[start, end)` of chunk `index` out of `n` items.
pub fn chunk_range(n: u64, index: usize) -> core::ops::Range<u64> {
    let start = index as u64 * CHUNK as u64;
    start..(start + CHUNK as u64).min(n)
}
