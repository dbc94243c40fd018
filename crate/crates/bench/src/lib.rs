//! Fixed inputs shared by the benchmarks.

use seqmc_core::quantum::random::{random_ensemble, Seeder};
use seqmc_core::quantum::{gu_ensemble, two_state_ensemble};
use seqmc_core::Ensemble;

pub const SEED: u64 = 7;

pub fn two_state() -> Ensemble {
    two_state_ensemble(0.8, std::f64::consts::FRAC_PI_3).expect("valid parameters")
}

pub fn trine() -> Ensemble {
    gu_ensemble(3).expect("valid parameters")
}

/// `n` random rank-one states in dimension `d`.
pub fn random_pure(d: usize, n: usize) -> Ensemble {
    let mut rng = Seeder::new(SEED).stream((d * 100 + n) as u64);
    random_ensemble(&mut rng, d, n, 1).expect("valid parameters")
}
