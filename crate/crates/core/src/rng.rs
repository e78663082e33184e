//! Deterministic counter-based random streams.
//!
//! A stream is identified by `(seed, stream_id)`. The byte-exact construction,
//! for ports to other languages:
//!
//! * generator: ChaCha with 8 rounds (Bernstein's original 64-bit counter /
//!   64-bit nonce layout), as implemented by `rand_chacha::ChaCha8Rng`;
//! * key (32 bytes): `seed` as 8 little-endian bytes followed by 24 zero bytes;
//! * nonce ("stream", 64 bits): `stream_id`;
//! * block counter starts at 0; every 64-byte block yields sixteen 32-bit
//!   little-endian words in order;
//! * a `u64` draw is two consecutive words, the first one being the low half;
//! * a uniform draw is `((u >> 12) + 0.5) * 2^-52`, which lies in the open
//!   interval `(0, 1)`: the smallest value is `2^-53`, the largest `1 - 2^-53`.
//!
//! Distinct `stream_id`s are distinct ChaCha nonces under one key and hence
//! computationally independent. Monte Carlo sample `k` always uses
//! `stream_id = k`, so results never depend on how samples are scheduled.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const UNIFORM_SCALE: f64 = 1.0 / (1u64 << 52) as f64;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    core: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut core = ChaCha8Rng::from_seed(key);
        core.set_stream(stream_id);
        RngStream { seed, stream_id, core }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 12) as f64 + 0.5) * UNIFORM_SCALE
    }

    /// Uniform on the open interval (lo, hi); the endpoints are never returned.
    #[inline]
    pub fn uniform_open(&mut self, lo: f64, hi: f64) -> f64 {
        let v = lo + (hi - lo) * self.uniform();
        v.clamp(lo.next_up(), hi.next_down())
    }

    /// Unit exponential, strictly positive and finite.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -libm::log(self.uniform())
    }
}

/// Seed for replication `index` of an experiment seeded with `seed`.
///
/// SplitMix64 finalizer applied to `seed ^ mix(index + 1)`, with the usual
/// constants 0x9E3779B97F4A7C15, 0xBF58476D1CE4E5B9, 0x94D049BB133111EB.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_reproduce() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_and_seeds_differ() {
        let first = |seed, id| RngStream::new(seed, id).next_u64();
        assert_ne!(first(1, 0), first(1, 1));
        assert_ne!(first(1, 0), first(2, 0));
    }

    // Frozen from an independent ChaCha8 implementation of the documented
    // layout (draws 0, 3, 6, 9; the last two cross a block boundary).
    #[test]
    fn known_answers() {
        let cases: [(u64, u64, [u64; 4]); 3] = [
            (0, 0, [0xd640_5f89_2fef_003e, 0x1e1a_71ef_88e1_1b18, 0x01b0_86da_a342_4a31, 0xada5_f201_6cdb_0abf]),
            (42, 7, [0x2f88_af39_a26c_4769, 0xbbfb_26fc_5ecb_3526, 0x6db3_6c97_ba44_17cc, 0xbaa2_814a_b9de_6ba5]),
            (
                0xDEAD_BEEF,
                123_456_789,
                [0xe561_d53f_d26b_498d, 0x32a8_4922_f1d1_75f1, 0x99a0_43c0_6603_ebc1, 0xfeb0_98bc_b374_bcd2],
            ),
        ];
        for (seed, stream, expected) in cases {
            let mut r = RngStream::new(seed, stream);
            let draws: alloc::vec::Vec<u64> = (0..10).map(|_| r.next_u64()).collect();
            assert_eq!([draws[0], draws[3], draws[6], draws[9]], expected, "seed {seed} stream {stream}");
        }
    }

    #[test]
    fn uniform_stays_open() {
        let mut r = RngStream::new(3, 3);
        for _ in 0..100_000 {
            let u = r.uniform();
            assert!(u > 0.0 && u < 1.0);
            let v = r.uniform_open(0.0, core::f64::consts::PI);
            assert!(v > 0.0 && v < core::f64::consts::PI);
            assert!(r.exponential() > 0.0);
        }
        const { assert!(((u64::MAX >> 12) as f64 + 0.5) * UNIFORM_SCALE < 1.0) };
        const { assert!((0.5 * UNIFORM_SCALE) > 0.0) };
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let s: alloc::vec::Vec<u64> = (0..1000).map(|i| derive_seed(9, i)).collect();
        let mut t = s.clone();
        t.sort_unstable();
        t.dedup();
        assert_eq!(t.len(), s.len());
    }
}
