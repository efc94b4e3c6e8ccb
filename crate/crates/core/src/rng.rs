//! Deterministic seed derivation.
//!
//! Every random stream in a run is a ChaCha8 generator seeded from the run
//! seed and a path of indices (episode index, purpose tag, ...), so results
//! do not depend on worker count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a root seed with a path of stream identifiers.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(root), |acc, p| splitmix64(acc ^ splitmix64(*p)))
}

pub fn rng_for(root: u64, path: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(root, path))
}

/// Stream tags.
pub mod tag {
    pub const WORLD: u64 = 1;
    pub const GRAY: u64 = 2;
    pub const RED: u64 = 3;
    pub const DEVIATION: u64 = 4;
    pub const TASK: u64 = 10;
    pub const POLICY: u64 = 11;
    pub const INIT: u64 = 12;
    pub const SHUFFLE: u64 = 13;
    pub const EVAL: u64 = 14;
    pub const CURRICULUM: u64 = 15;
}
