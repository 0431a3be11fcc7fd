//! Stateless seeding: every random draw is keyed by `(seed, counter)` so
//! results do not depend on evaluation order or thread count.

use rand_pcg::Pcg64;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a seed with a sequence of counters into one well-mixed key.
pub fn derive_seed(seed: u64, counters: &[u64]) -> u64 {
    counters
        .iter()
        .fold(mix64(seed), |acc, &c| mix64(acc ^ mix64(c.wrapping_add(GOLDEN))))
}

/// Generator dedicated to one counter value.
pub fn counter_rng(seed: u64, counter: u64) -> Pcg64 {
    let hi = derive_seed(seed, &[counter]);
    let lo = derive_seed(seed ^ GOLDEN, &[counter]);
    Pcg64::new(((hi as u128) << 64) | lo as u128, counter as u128)
}
