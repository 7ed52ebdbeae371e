//! Seeded randomness.

use rand::SeedableRng;
use rand_xorshift::XorShiftRng;

/// The generator used for every random draw in the workspace.
pub type Rng = XorShiftRng;

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Derive an independent sub-seed for `stream` from `seed` (SplitMix64 finalizer).
///
/// Used to give each dataset part, epoch or trial its own generator while
/// keeping the whole run a function of one base seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
