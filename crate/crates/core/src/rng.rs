//! Named random sub-streams.
//!
//! Every random draw in a run derives from one master seed. Components ask for
//! a stream by name (`"data-split"`, `"circuit"`, `"dropout"`, `"bounds"`, ...)
//! so that any one of them can be reproduced in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a(name: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in name.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// SplitMix64 finalizer.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stream `name` of the master `seed`.
pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name));
    rng
}

/// Stream `name` further split by an integer index (epoch, step, sample...).
pub fn indexed_stream(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(index)));
    rng.set_stream(fnv1a(name));
    rng
}

/// A 64-bit seed derived from `seed` for the component `name`.
pub fn derive_seed(seed: u64, name: &str) -> u64 {
    mix64(seed ^ fnv1a(name))
}
