//! Deterministic per-cell random streams.
//!
//! Every (run seed, cell id, generation) triple maps to a fixed position in
//! a ChaCha8 stream: the run seed keys the cipher, the cell id selects the
//! stream and the generation selects the block. Simulation results therefore
//! depend only on the seed, never on iteration order or thread count.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// 32-bit words reserved per step; one ChaCha block, eight u64 draws.
const WORDS_PER_STEP: u128 = 16;

/// Random stream for one cell at one generation.
pub fn step_rng(run_seed: u64, cell_id: u64, generation: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(cell_id);
    rng.set_word_pos(generation as u128 * WORDS_PER_STEP);
    rng
}

/// Uniform draw in [0, 1) with 53 random bits.
#[inline]
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
