//! Counter-based seed derivation.
//!
//! Every random stream in the crate is keyed by `(master, domain, index...)`
//! through a SplitMix64 finalizer, so a realization's noise depends only on
//! its index and never on which worker ran it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains. Distinct constants keep disorder, noise and bootstrap
/// streams from colliding when they share a master seed.
pub mod domain {
    pub const DISORDER: u64 = 0x6469_736f_7264_6572;
    pub const TELEGRAPH: u64 = 0x7465_6c65_6772_6170;
    pub const GAUSSIAN: u64 = 0x6761_7573_7369_616e;
    pub const SITE: u64 = 0x7369_7465_5f5f_5f5f;
    pub const BOOTSTRAP: u64 = 0x626f_6f74_7374_7270;
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed, a domain tag and an index.
pub fn derive(parent: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent ^ domain).wrapping_add(splitmix64(index)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_stable_and_distinct() {
        let a = derive(42, domain::TELEGRAPH, 0);
        assert_eq!(a, derive(42, domain::TELEGRAPH, 0));
        assert_ne!(a, derive(42, domain::TELEGRAPH, 1));
        assert_ne!(a, derive(42, domain::GAUSSIAN, 0));
        assert_ne!(a, derive(43, domain::TELEGRAPH, 0));
    }
}
