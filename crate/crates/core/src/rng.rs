//! Seed derivation for independent random substreams.
//!
//! A stream is addressed by `(seed, purpose, product, month)`; the mapping is
//! a fixed splitmix64 chain, so it does not depend on the `rand` version.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    ForecastError = 1,
    Orders = 2,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a base seed together with any number of integer labels.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(base), |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// Stable 64-bit FNV-1a hash of a label, for mixing strings into seeds.
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

pub fn stream(seed: u64, purpose: Purpose, product: u32, month: u32) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[purpose as u64, product as u64, month as u64]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derivation_is_stable() {
        // Frozen so seeds recorded in result files stay reproducible.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
    }

    #[test]
    fn streams_differ() {
        let a: u64 = stream(5, Purpose::Orders, 10, 0).random();
        let b: u64 = stream(5, Purpose::Orders, 10, 1).random();
        let c: u64 = stream(5, Purpose::ForecastError, 10, 0).random();
        assert!(a != b && a != c);
    }
}
