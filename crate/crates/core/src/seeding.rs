//! Seed derivation. Every replication owns independent ChaCha streams
//! keyed by a fixed stream id, so a policy's coin flips never move the
//! reward tape.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed stream ids derived from one replication seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Tape = 0,
    Algorithm1 = 1,
    Algorithm2 = 2,
    /// Second tape, used only when two individual runs must not share rewards.
    IndependentTape = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Seed of replication `index` under `master_seed`.
pub fn replication_seed(master_seed: u64, index: usize) -> u64 {
    // splitmix64 finalizer over the pair; cheap and keeps nearby indices apart
    let mut z = master_seed
        .wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
