#![allow(dead_code)]

use fracmc_core::{Moments, RngStream};

/// Mean and standard error of `f` over `n` draws from one stream.
pub fn mc<F: FnMut(&mut RngStream) -> f64>(seed: u64, n: usize, mut f: F) -> Moments {
    let mut rng = RngStream::new(seed, 0);
    let mut m = Moments::new();
    for _ in 0..n {
        m.push(f(&mut rng));
    }
    m
}

pub fn assert_within_4se(m: &Moments, expected: f64, what: &str) {
    let z = (m.mean - expected) / m.stderr();
    assert!(z.abs() < 4.0, "{what}: mean {} vs {expected} ({z:.2} SE)", m.mean);
}

/// Scoped-thread executor for the heavier tests.
pub struct Threads(pub usize);

impl fracmc_core::Executor for Threads {
    fn map<R: Send, F: Fn(usize) -> R + Sync>(&self, count: usize, job: F) -> Vec<R> {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let mut slots: Vec<Option<R>> = (0..count).map(|_| None).collect();
        let results = std::sync::Mutex::new(Vec::with_capacity(count));
        std::thread::scope(|s| {
            for _ in 0..self.0.max(1) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= count {
                        break;
                    }
                    let r = job(i);
                    results.lock().unwrap().push((i, r));
                });
            }
        });
        for (i, r) in results.into_inner().unwrap() {
            slots[i] = Some(r);
        }
        slots.into_iter().map(Option::unwrap).collect()
    }
}

pub fn threads() -> Threads {
    Threads(std::thread::available_parallelism().map_or(4, |n| n.get()))
}
