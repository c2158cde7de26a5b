use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Every stochastic routine in the crate draws from a ChaCha8 stream seeded with `seed_from_u64`.
/// The algorithm is part of the reproducibility contract: changing it changes every pinned
/// sampled result.
pub(crate) type Rng = ChaCha8Rng;

pub(crate) fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mix a base seed with a stream index (group, trajectory, evaluation...) into an
/// independent-looking child seed. SplitMix64 finaliser.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
