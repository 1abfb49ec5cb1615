//! Portable seeded randomness for synthetic benchmarks.
//!
//! The generator is ChaCha20 (20 rounds, 64-bit block counter starting at 0,
//! stream 0). A `u64` seed becomes the 256-bit key by writing it
//! little-endian into the first 8 key bytes and zero-filling the rest, so any
//! ChaCha20 implementation can reproduce our streams. Seed 0 therefore yields
//! the all-zero-key keystream, whose first words are
//! `0xade0b876 0x903df1a0 0xe56a5d40 0x28bd8653` (little-endian words of the
//! keystream `76 b8 e0 ad a0 f1 3d 90 ...`).
//!
//! Derived draws:
//! - `next_u64` is two consecutive 32-bit words, low word first.
//! - `unit` is `(next_u64 >> 11) * 2^-53`, uniform on `[0, 1)`.
//! - `below(k)` rejects draws under `2^64 mod k` and returns `x mod k`.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        SeededRng {
            inner: ChaCha20Rng::from_seed(key),
        }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    pub fn next_u64(&mut self) -> u64 {
        let lo = self.inner.next_u32() as u64;
        let hi = self.inner.next_u32() as u64;
        (hi << 32) | lo
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One draw; true with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Uniform integer in `0..k`. Panics if `k == 0`.
    pub fn below(&mut self, k: u64) -> u64 {
        assert!(k > 0, "empty range");
        let threshold = k.wrapping_neg() % k;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % k;
            }
        }
    }
}
