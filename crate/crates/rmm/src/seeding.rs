//! Deterministic seed derivation. Every random stream in the crate is keyed
//! by a master seed plus a tag path, so episodes, tasks, and data splits are
//! reproducible regardless of execution order or worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Tag namespaces for derived streams.
pub mod tags {
    pub const TASK: u64 = 0x01;
    pub const EPISODE: u64 = 0x02;
    pub const DATASET: u64 = 0x03;
    pub const POLICY_INIT: u64 = 0x04;
    pub const EVAL: u64 = 0x05;
    pub const LEVEL1: u64 = 0x06;
    pub const LEVEL2: u64 = 0x07;
    pub const DATA: u64 = 0x08;
    pub const CLASSIFIER: u64 = 0x09;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes a master seed with a tag path into a stream seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &tag in path {
        state = splitmix64(state ^ splitmix64(tag));
    }
    state
}

/// Seeded ChaCha stream for the given tag path.
pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_paths_distinct_seeds() {
        let a = derive_seed(7, &[tags::TASK, 0, 1]);
        let b = derive_seed(7, &[tags::TASK, 1, 0]);
        let c = derive_seed(7, &[tags::EPISODE, 0, 1]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
    }

    #[test]
    fn derivation_is_stable() {
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
    }
}
