//! Seed derivation.
//!
//! Trials, audit runs and nested mechanisms never share an RNG stream. Each
//! gets its own ChaCha generator keyed by a seed derived from a root seed and
//! a counter, so results do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PrivRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed number `index` of `root`.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    mix64(root ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// Child seed for a named sub-stream, e.g. `"sanitizer"` inside a trial.
pub fn derive_named(root: u64, label: &str) -> u64 {
    // FNV-1a over the label, then mixed with the root.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    derive_seed(root, h)
}

pub fn rng_from_seed(seed: u64) -> PrivRng {
    PrivRng::seed_from_u64(seed)
}
