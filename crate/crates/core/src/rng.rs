//! Seeded randomness. Every stochastic step draws from a ChaCha8 stream whose
//! seed is derived from the run's base seed and the step's coordinates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with integer coordinates (stage, cell, fold, ...).
pub fn derive_seed(base: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(base), |acc, c| splitmix64(acc ^ splitmix64(*c)))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stage tags used with [`derive_seed`].
pub mod stage {
    pub const CLASSIFIER_SPLIT: u64 = 1;
    pub const BOOTSTRAP: u64 = 2;
    pub const SHUFFLE: u64 = 3;
    pub const DISCRETIZE: u64 = 4;
    pub const CV_FOLDS: u64 = 5;
    pub const SVM: u64 = 6;
    pub const SYNTH: u64 = 7;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn derivation_is_stable_and_coordinate_sensitive() {
        assert_eq!(derive_seed(42, &[1, 2]), derive_seed(42, &[1, 2]));
        assert_ne!(derive_seed(42, &[1, 2]), derive_seed(42, &[2, 1]));
        assert_ne!(derive_seed(42, &[1]), derive_seed(43, &[1]));
        let a: u64 = rng_from_seed(7).random();
        let b: u64 = rng_from_seed(7).random();
        assert_eq!(a, b);
    }
}
