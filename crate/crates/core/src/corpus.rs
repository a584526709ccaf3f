//! Seeded random order functions for property sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rspec::{RSpec, SublinearSpec, TailRule};

/// Default cap on the order drawn at each index.
pub const DEFAULT_CAP: usize = 12;

/// A table spec on `[0, horizon]` with `r(n)` uniform in `[1, min(n, cap)]`.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, horizon: usize, cap: usize) -> SublinearSpec {
    let mut values = Vec::with_capacity(horizon + 1);
    values.push(1);
    for n in 1..=horizon {
        values.push(rng.gen_range(1..=n.min(cap).max(1)));
    }
    RSpec::table(values, TailRule::Error)
        .validate()
        .expect("drawn orders are sublinear")
}

/// `count` random specs, reproducible from `seed`.
pub fn random_corpus(seed: u64, count: usize, horizon: usize, cap: usize) -> Vec<SublinearSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_spec(&mut rng, horizon, cap)).collect()
}
