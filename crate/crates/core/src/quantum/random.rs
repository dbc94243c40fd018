//! Seeded random states, channels and ensembles.
//!
//! All randomness comes from ChaCha20. A [`Seeder`] turns a `u64` seed into a
//! 256-bit key (the key `ChaCha20Rng::seed_from_u64(seed)` would use) and
//! hands out independent streams of that key by index, so a computation
//! that gives item `i` its own stream is reproducible regardless of how the
//! items are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::{DensityOperator, Ensemble, KrausChannel, PureState};
use crate::error::{out_of_range, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, C64};

/// Splittable source of ChaCha20 streams.
#[derive(Clone, Debug)]
pub struct Seeder {
    key: <ChaCha20Rng as SeedableRng>::Seed,
}

impl Seeder {
    pub fn new(seed: u64) -> Self {
        Self {
            key: ChaCha20Rng::seed_from_u64(seed).get_seed(),
        }
    }

    /// Generator for stream `index`, positioned at its start.
    pub fn stream(&self, index: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random pure state (normalised complex Gaussian vector).
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<PureState> {
    let v: Vec<C64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
    PureState::normalized(v)
}

/// Induced mixed state `G G^dag / tr` with `G` a `dim x rank` Ginibre matrix.
pub fn ginibre_state<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<DensityOperator> {
    if rank == 0 {
        return Err(out_of_range("rank", "must be at least 1"));
    }
    let cols: Vec<Vec<C64>> = (0..rank)
        .map(|_| (0..dim).map(|_| gaussian_complex(rng)).collect())
        .collect();
    let m: ComplexMatrix = cols.iter().map(|c| ComplexMatrix::projector(c)).sum();
    let tr = m.trace().re;
    DensityOperator::new(m.scale(1.0 / tr))
}

/// Random channel with `count` Kraus operators: Gaussian operators `A_i`
/// renormalised as `A_i S^{-1/2}` with `S = sum A_i^dag A_i`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Result<KrausChannel> {
    if count == 0 {
        return Err(out_of_range("count", "must be at least 1"));
    }
    let raw: Vec<ComplexMatrix> = (0..count)
        .map(|_| ComplexMatrix::from_fn(dim, |_, _| gaussian_complex(rng)))
        .collect();
    let s: ComplexMatrix = raw.iter().map(|a| &a.adjoint() * a).sum();
    let inv_sqrt = eig_hermitian(&s)?.map(|x| 1.0 / x.sqrt());
    KrausChannel::new(raw.iter().map(|a| a * &inv_sqrt).collect())
}

/// `n` Ginibre states of the given rank with priors drawn uniformly from the simplex.
pub fn random_ensemble<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n: usize,
    rank: usize,
) -> Result<Ensemble> {
    if n == 0 {
        return Err(out_of_range("n", "must be at least 1"));
    }
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let priors = raw.iter().map(|w| w / total).collect();
    let states = (0..n)
        .map(|_| ginibre_state(rng, dim, rank))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(format!("random(d={dim}, n={n}, rank={rank})"), priors, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::apply_channel;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = Seeder::new(7);
        let a: u64 = s.stream(3).random();
        let b: u64 = s.stream(3).random();
        let c: u64 = s.stream(4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let d: u64 = Seeder::new(8).stream(3).random();
        assert_ne!(a, d);
    }

    #[test]
    fn stream_zero_matches_seed_from_u64() {
        let mut x = Seeder::new(42).stream(0);
        let mut y = ChaCha20Rng::seed_from_u64(42);
        assert_eq!(x.random::<u64>(), y.random::<u64>());
    }

    #[test]
    fn random_objects_are_valid() {
        let mut rng = Seeder::new(1).stream(0);
        for d in 2..5 {
            assert_eq!(haar_state(&mut rng, d).unwrap().dim(), d);
            let rho = ginibre_state(&mut rng, d, 2).unwrap();
            let ch = random_channel(&mut rng, d, 3).unwrap();
            assert!(ch.completeness_defect() < 1e-10);
            let out = apply_channel(&ch, &rho).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
            let ens = random_ensemble(&mut rng, d, 3, 1).unwrap();
            assert!((ens.priors().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
