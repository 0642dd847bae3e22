//! Seeded random streams.
//!
//! Every random consumer (zeta sampling, synthetic problems, power iteration
//! starts) draws from a ChaCha generator keyed by the run seed and a stream
//! name, so concurrent runs never share generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn stream_id(name: &str) -> u64 {
    // FNV-1a; stable across toolchains unlike std's hasher.
    name.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Generator for `(seed, name)`.
pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(name));
    rng
}

/// Generator positioned at draw `index` of `(seed, name)`, for random access
/// into per-iteration sequences.
pub fn stream_at(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut rng = stream(seed, name);
    // one f64 sample consumes two 32-bit words
    rng.set_word_pos(u128::from(index) * 2);
    rng
}
