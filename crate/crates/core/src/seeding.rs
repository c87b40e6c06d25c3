//! Deterministic seed derivation.
//!
//! Every run consumes randomness from a single 64-bit master seed.  Derived
//! streams are produced by a counter-based SplitMix64 walk, so workers can be
//! scheduled in any order without changing what each one draws:
//!
//! ```text
//! stream(master, label) = splitmix64(master ⊕ fnv1a(label))
//! split_seed(seed, i)   = splitmix64(seed + (i+1)·GOLDEN)
//! ```

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a hash of a label, for naming independent streams.
pub fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Seed for a named stream under a master seed.
pub fn stream_seed(master: u64, label: &str) -> u64 {
    splitmix64(master ^ fnv1a(label))
}

/// Counter-based split: the i-th child seed of `seed`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}
