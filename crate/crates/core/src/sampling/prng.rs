//! Counter-addressed pseudo-random uniforms: ChaCha8 keyed by the seed, one
//! stream per sample index.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Uniforms for one sample. Coordinate `j` is the `j`-th 64-bit word of
/// stream `sample` under key `seed`.
pub fn fill_uniforms(seed: u64, sample: u64, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    for u in out {
        *u = to_open_unit(rng.next_u64());
    }
}

/// Top 52 bits mapped to the midpoint of their cell, so 0 and 1 never occur.
#[inline]
pub fn to_open_unit(word: u64) -> f64 {
    ((word >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
