//! Seeded, portable sampling.
//!
//! Every random choice in the toolkit goes through [`Sampler`], so another
//! implementation can reproduce our datasets from the same seed:
//!
//! * generator: SplitMix64 (Vigna's reference `splitmix64.c`), state
//!   initialised to the seed, `next_u64` as in the reference;
//! * bounded index in `[0, n)`: `(next_u64() as u128 * n) >> 64`
//!   (multiply-shift, no rejection step);
//! * shuffle: Fisher-Yates from the back, `for i in (1..len).rev() { swap(i, below(i + 1)) }`;
//! * sampling `k` of `n` without replacement: shuffle `0..n`, keep the
//!   first `k` in shuffled order.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: SplitMix64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform-ish index in `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, in sampled order. `k` is clamped to `n`.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx.truncate(k);
        idx
    }
}
