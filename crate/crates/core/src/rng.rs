//! Seed derivation.
//!
//! Every random draw in the crate flows from a `u64` seed through
//! [`rng_from_seed`]; replication seeds come from [`replication_seed`] so that
//! parallel workers never share generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Domain tags separating the streams derived from one replication seed.
pub mod domain {
    pub const GRAPH: u64 = 0x67_7261_7068;
    pub const DATA: u64 = 0x6461_7461;
    pub const ORDER: u64 = 0x6f_7264_6572;
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser.
fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn mix(a: u64, b: u64) -> u64 {
    avalanche(avalanche(a.wrapping_add(0x9e37_79b9_7f4a_7c15)) ^ b)
}

pub fn replication_seed(base_seed: u64, experiment_hash: u64, rep: u64) -> u64 {
    mix(mix(base_seed, experiment_hash), rep)
}

/// FNV-1a; stable across platforms and compiler versions.
pub fn stable_hash(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = (0..4).map({
            let mut r = rng_from_seed(7);
            move |_| r.random()
        }).collect();
        let b: Vec<u64> = (0..4).map({
            let mut r = rng_from_seed(7);
            move |_| r.random()
        }).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn domains_separate() {
        let s = replication_seed(1, 2, 3);
        assert_ne!(mix(s, domain::GRAPH), mix(s, domain::DATA));
        assert_ne!(replication_seed(1, 2, 3), replication_seed(1, 2, 4));
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(stable_hash(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(stable_hash("a"), 0xaf63_dc4c_8601_ec8c);
    }
}
