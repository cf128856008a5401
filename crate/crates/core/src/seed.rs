//! Seed derivation.
//!
//! Every random stream in the crate is a [`SimRng`] seeded from a master seed
//! and a `(component, index)` pair, so subsystems replay independently and
//! parallel work never changes results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

/// First 8 bytes (little endian) of `SHA-256(master ‖ component ‖ 0x00 ‖ index)`.
pub fn derive_seed(master: u64, component: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(component.as_bytes());
    h.update([0u8]);
    h.update(index.to_le_bytes());
    let out = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&out[..8]);
    u64::from_le_bytes(word)
}

pub fn stream(master: u64, component: &str, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, component, index))
}

/// SplitMix64 finalizer; used for counter-based bit streams.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_stable_and_separates_components() {
        assert_eq!(derive_seed(7, "trial", 3), derive_seed(7, "trial", 3));
        assert_ne!(derive_seed(7, "trial", 3), derive_seed(7, "trial", 4));
        assert_ne!(derive_seed(7, "trial", 3), derive_seed(7, "plan", 3));
        assert_ne!(derive_seed(7, "trial", 3), derive_seed(8, "trial", 3));
    }
}
