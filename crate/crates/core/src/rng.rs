//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] addressed by
//! `(seed, domain, index)`: the key is `splitmix64(seed ^ splitmix64(domain))`
//! and the ChaCha stream id is `index`. Records, training steps, and
//! evaluation lengths each get their own stream, so results never depend on
//! execution order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags separating independent uses of one master seed.
pub mod domain {
    pub const DATASET: u64 = 1;
    pub const TRAIN_BATCH: u64 = 2;
    pub const VALIDATION: u64 = 3;
    pub const EVAL: u64 = 4;
    pub const INIT: u64 = 5;
    pub const BATCH_RECORD: u64 = 6;
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Child seed for `(seed, domain, index)`, for handing to nested samplers.
pub fn derive_seed(seed: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(domain)) ^ splitmix64(index.wrapping_add(0x5851_F42D)))
}

pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(domain)));
    rng.set_stream(index);
    rng
}
