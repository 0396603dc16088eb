use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Every random draw in the crate goes through this generator so results are
/// stable across platforms and releases of `rand`'s default RNG.
pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
