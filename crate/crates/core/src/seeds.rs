//! Deterministic seed derivation.
//!
//! Derived seeds are `mix(parent, counter)`: the counter is combined with the
//! parent seed and passed through the SplitMix64 finalizer. Split-half repeat
//! `i`, half `h` trains with `mix(mix(rng_seed, i), h)`; its partition uses
//! `mix(rng_seed, i)` directly.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(parent: u64, counter: u64) -> u64 {
    splitmix64(parent ^ splitmix64(counter))
}

/// FNV-1a over the UTF-8 bytes.
pub fn string_hash(s: &str) -> u64 {
    s.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}
