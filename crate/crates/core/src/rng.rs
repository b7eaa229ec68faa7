//! Seeded random streams for reproducible runs.
//!
//! A run owns one [`RngState`]. Batch draws and parameter initialization come
//! from separate ChaCha streams of the same seed, so consuming one never shifts
//! the other.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BATCH_STREAM: u64 = 0;
const INIT_STREAM: u64 = 1;

#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    batches: ChaCha8Rng,
    init: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        let mut batches = ChaCha8Rng::seed_from_u64(seed);
        batches.set_stream(BATCH_STREAM);
        let mut init = ChaCha8Rng::seed_from_u64(seed);
        init.set_stream(INIT_STREAM);
        Self { seed, batches, init }
    }

    /// Child state for run `key` of an experiment seeded with `master`.
    pub fn for_run(master: u64, key: u64) -> Self {
        Self::new(derive_seed(master, key))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream consumed by mini-batch sampling.
    pub fn batch_stream(&mut self) -> &mut ChaCha8Rng {
        &mut self.batches
    }

    /// Stream consumed by initial-point generation and other one-off draws.
    pub fn init_stream(&mut self) -> &mut ChaCha8Rng {
        &mut self.init
    }

    /// Vector with entries uniform in `[lo, hi)` from the init stream.
    pub fn uniform_vec(&mut self, len: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..len).map(|_| self.init.random_range(lo..hi)).collect()
    }
}

/// SplitMix64 finalizer over `master ^ mix(key)`.
pub fn derive_seed(master: u64, key: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master ^ mix(key))
}
