//! Seeded random streams.
//!
//! Every randomized operation takes an explicit [`ProbeRng`]. Parallel work
//! derives independent sub-streams from a base seed with [`substream`], so
//! results do not depend on thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type ProbeRng = ChaCha20Rng;

/// Stream 0 of `seed`.
pub fn seeded(seed: u64) -> ProbeRng {
    ProbeRng::seed_from_u64(seed)
}

/// Independent sub-stream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> ProbeRng {
    let mut rng = ProbeRng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws an index from unnormalised non-negative weights with a single
/// uniform variate.
///
/// Both the Markov sampler and model decoding go through this function, so two
/// callers fed the same weights and the same stream produce the same index.
pub fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
    }
    // u * total can round up to total
    last_positive
}
