//! Seeded random streams.
//!
//! All stochastic operations take an explicit generator. Streams that must
//! not depend on scheduling order are derived from `(seed, generation, slot)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for one `(generation, slot)` cell of a seeded run.
pub fn stream(seed: u64, generation: u32, slot: u32) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | slot as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(9, 1, 2).random();
        let b: u64 = stream(9, 1, 2).random();
        let c: u64 = stream(9, 2, 1).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
