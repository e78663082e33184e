//! A scoped-thread [`Executor`]. Jobs are handed out through a shared counter
//! and the results are put back in job order, so the worker count never
//! changes a result.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use fracmc_core::Executor;

#[derive(Clone, Copy, Debug)]
pub struct Threads {
    workers: usize,
}

impl Threads {
    pub fn new(workers: usize) -> Self {
        Threads { workers: workers.max(1) }
    }

    /// One worker per available core.
    pub fn available() -> Self {
        Self::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl Executor for Threads {
    fn map<R: Send, F: Fn(usize) -> R + Sync>(&self, count: usize, job: F) -> Vec<R> {
        if self.workers == 1 || count <= 1 {
            return (0..count).map(job).collect();
        }
        let next = AtomicUsize::new(0);
        let done = Mutex::new(Vec::with_capacity(count));
        std::thread::scope(|s| {
            for _ in 0..self.workers.min(count) {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= count {
                            break;
                        }
                        local.push((i, job(i)));
                    }
                    done.lock().expect("worker panicked").extend(local);
                });
            }
        });
        let mut done = done.into_inner().expect("worker panicked");
        done.sort_unstable_by_key(|(i, _)| *i);
        done.into_iter().map(|(_, r)| r).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_come_back_in_job_order() {
        for workers in [1, 2, 8] {
            let out = Threads::new(workers).map(1000, |i| i * i);
            assert_eq!(out, (0..1000).map(|i| i * i).collect::<Vec<_>>());
        }
        assert!(Threads::new(4).map(0, |i| i).is_empty());
    }
}
