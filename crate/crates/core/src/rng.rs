//! Deterministic random streams.
//!
//! Every consumer of randomness gets its own ChaCha8 stream derived from the
//! run seed and a fixed stream id, so results never depend on the order in
//! which parallel work happens to be scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream used to draw the initial IDE population.
pub const INIT_STREAM: u64 = u64::MAX;
/// Stream used to draw a random initial codebook for plain LBG.
pub const RANDOM_CODEBOOK_STREAM: u64 = u64::MAX - 1;

pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for candidate `candidate` in generation `generation` (>= 1).
pub fn candidate_stream(seed: u64, generation: usize, candidate: usize) -> StreamRng {
    debug_assert!(candidate < u32::MAX as usize);
    substream(seed, ((generation as u64) << 32) | candidate as u64)
}
