//! Per-episode random stream.
//!
//! Every episode owns one ChaCha8 generator seeded with `seed_from_u64(seed)`.
//! Draw order on stream 0 is: general tile, trees, team shuffle, player
//! placement, initial random kill, then one action draw per living player per
//! step (player-index order). Observer sampling for belief-manipulation
//! bonuses uses stream 1 of the same key so that computing bonuses never
//! perturbs the trajectory.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ACTION_STREAM: u64 = 0;
pub const OBSERVER_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeRng(ChaCha8Rng);

impl EpisodeRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, ACTION_STREAM)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        EpisodeRng(inner)
    }

    /// Uniform integer in `0..n`. `n` must be nonzero.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.0.gen_range(0..n as u64) as usize
    }

    /// Uniform float in `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.0.gen::<f64>()
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// Choose `k` distinct elements from `pool` (partial Fisher-Yates; `pool`
    /// is reordered in place). Returns `None` when `k > pool.len()`.
    pub fn choose_distinct<T: Copy>(&mut self, pool: &mut [T], k: usize) -> Option<Vec<T>> {
        if k > pool.len() {
            return None;
        }
        for i in 0..k {
            let j = i + self.below(pool.len() - i);
            pool.swap(i, j);
        }
        Some(pool[..k].to_vec())
    }
}
