use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent uniform draws addressed by `(vertex, round, lane)`.
///
/// The ChaCha key comes from the root seed, the stream from the vertex and
/// the block position from the round, so any draw can be recomputed without
/// replaying the ones before it.
#[derive(Clone)]
pub struct CounterRng {
    base: ChaCha8Rng,
}

/// Number of lanes per round.
pub const LANES: u32 = 8;

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform in `(0, 1]`, with 53 random bits.
    pub fn uniform(&self, vertex: u32, round: u32, lane: u32) -> f64 {
        debug_assert!(lane < LANES);
        let mut rng = self.base.clone();
        rng.set_stream(vertex as u64);
        // two 32-bit words per lane
        rng.set_word_pos(((round as u128) * LANES as u128 + lane as u128) * 2);
        let bits: u64 = rng.gen::<u64>() >> 11;
        (bits + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
