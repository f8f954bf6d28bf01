//! Seed derivation for independent replica streams.
//!
//! A replica's stream seed is
//!
//! ```text
//! derive_seed(master, index, label) = mix(master ^ fnv1a64(label) ^ index)
//! mix(z):  z = (z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9
//!          z = (z ^ (z >> 27)) * 0x94D0_49BB_1331_11EB
//!          z ^ (z >> 31)
//! ```
//!
//! `fnv1a64` is the 64-bit FNV-1a hash (offset basis `0xCBF2_9CE4_8422_2325`,
//! prime `0x0000_0100_0000_01B3`). `mix` is a bijection on `u64`, so for a
//! fixed master seed and label distinct replica indices never collide.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream label for point-process sampling.
pub const POINTS: &str = "points";
/// Stream label for edge passage times.
pub const WEIGHTS: &str = "weights";
/// Stream label for bond configurations.
pub const BONDS: &str = "bonds";
/// Stream label for auxiliary randomness (subsampling, site fields).
pub const AUX: &str = "aux";

const FNV_OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Two rounds of multiply-xorshift (the splitmix64 finalizer).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, replica_index: u64, stream_label: &str) -> u64 {
    mix64(master ^ fnv1a64(stream_label.as_bytes()) ^ replica_index)
}

/// Deterministic RNG for one (master, replica, stream) triple.
pub fn stream_rng(master: u64, replica_index: u64, stream_label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, replica_index, stream_label))
}

/// Uniform in `[0, 1)` from a 64-bit key, using the top 53 bits.
pub(crate) fn unit_from_key(key: u64) -> f64 {
    (mix64(key) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
