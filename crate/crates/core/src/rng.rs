//! Seed derivation for independently seeded workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every sampling and training routine.
pub type SeededRng = ChaCha8Rng;

/// splitmix64 finalizer; mixes a base seed with a stream index.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

pub fn stream(base: u64, index: u64) -> SeededRng {
    seeded(derive_seed(base, index))
}
