//! Seed management.
//!
//! All randomness in a run flows from one manifest seed. Subsystems get
//! independent deterministic streams derived from `(seed, label, index)`, so
//! adding consumers to one subsystem never perturbs another: the driver
//! population sampled for episode `i` is the same no matter which predictor
//! the controller uses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derive a deterministic RNG for a named sub-stream of `seed`.
pub fn stream_rng(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut h = splitmix64(seed ^ fnv1a(label.as_bytes()));
    h = splitmix64(h ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    ChaCha8Rng::seed_from_u64(h)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
