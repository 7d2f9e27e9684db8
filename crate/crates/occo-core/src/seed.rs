//! Labeled seed derivation.
//!
//! Every random decision in the pipeline draws from a ChaCha stream seeded
//! through this module, so one master seed plus a label path fully determines
//! the output regardless of evaluation order or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with a label and numeric ids into a derived seed.
pub fn derive_seed(master: u64, label: &str, ids: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ 0x6f63_636f_7365_6564); // "occoseed"
    for &b in label.as_bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    for &id in ids {
        h = splitmix64(h ^ id);
    }
    h
}

/// Deterministic RNG for a derived seed.
pub fn rng_for(master: u64, label: &str, ids: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(master, label, ids))
}
