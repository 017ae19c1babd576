//! Fixtures shared by the benchmarks.

use kepfair::instance::{generate_instance, Instance};
use kepfair::pricing::PricingWeights;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generated pool with 10% NDDs and the arc density used throughout the benches.
pub fn pool(n_pairs: usize, seed: u64) -> Instance {
    generate_instance(n_pairs, 0.1, 0.25, seed)
}

/// Pricing weights drawn uniformly from `[-0.5, 1.5)` per pair.
pub fn random_weights(inst: &Instance, seed: u64) -> PricingWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PricingWeights {
        alpha0: 0.0,
        w: (0..inst.len()).map(|_| rng.gen_range(-0.5..1.5)).collect(),
    }
}
