//! Monte Carlo simulation of sequential measurements.
//!
//! Trial `t` draws every random number from stream `t` of a [`Seeder`]: one
//! uniform for the prepared label, then one uniform per party for its
//! outcome. Counts are therefore independent of sharding and thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::random::Seeder;
use super::{Ensemble, KrausChannel};
use crate::error::{out_of_range, Error, Result};
use crate::linalg::ComplexMatrix;

/// Counts for one party, `joint[label][outcome]` with labels 0-based and
/// outcome `0` inconclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartyStats {
    pub joint: Vec<Vec<u64>>,
}

impl PartyStats {
    fn empty(labels: usize, outcomes: usize) -> Self {
        Self {
            joint: vec![vec![0; outcomes]; labels],
        }
    }

    fn merge(&mut self, other: &PartyStats) {
        for (a, b) in self.joint.iter_mut().zip(&other.joint) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn trials(&self) -> u64 {
        self.joint.iter().flatten().sum()
    }

    pub fn outcome_count(&self, outcome: usize) -> u64 {
        self.joint.iter().map(|row| row[outcome]).sum()
    }

    /// Empirical `P(label = x | outcome = x)` for conclusive label `x` (1-based).
    pub fn confidence(&self, x: usize) -> Option<f64> {
        let n = self.outcome_count(x);
        (n > 0).then(|| self.joint[x - 1][x] as f64 / n as f64)
    }

    /// Binomial standard error `sqrt(C(1-C)/N_x)` of [`Self::confidence`].
    pub fn std_error(&self, x: usize) -> Option<f64> {
        let c = self.confidence(x)?;
        Some((c * (1.0 - c) / self.outcome_count(x) as f64).sqrt())
    }

    /// Empirical inconclusive rate.
    pub fn eta0(&self) -> f64 {
        self.outcome_count(0) as f64 / self.trials().max(1) as f64
    }

    pub fn outcome_frequency(&self, outcome: usize) -> f64 {
        self.outcome_count(outcome) as f64 / self.trials().max(1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub seed: u64,
    pub trials: u64,
    pub parties: Vec<PartyStats>,
}

struct Prepared {
    kraus: Vec<ComplexMatrix>,
    effects: Vec<ComplexMatrix>,
}

/// Runs `trials` sequential measurements using all available threads.
pub fn sample_run(
    ens: &Ensemble,
    channels: &[KrausChannel],
    seed: u64,
    trials: u64,
) -> Result<SampleStats> {
    let shards = rayon::current_num_threads().max(1);
    sample_run_with_shards(ens, channels, seed, trials, shards)
}

/// As [`sample_run`] with an explicit number of contiguous trial shards.
pub fn sample_run_with_shards(
    ens: &Ensemble,
    channels: &[KrausChannel],
    seed: u64,
    trials: u64,
    shards: usize,
) -> Result<SampleStats> {
    if trials == 0 {
        return Err(out_of_range("trials", "must be at least 1"));
    }
    if shards == 0 {
        return Err(out_of_range("shards", "must be at least 1"));
    }
    for ch in channels {
        if ch.dim() != ens.dim() {
            return Err(Error::DimensionMismatch {
                expected: ens.dim(),
                actual: ch.dim(),
            });
        }
    }
    let prepared: Vec<Prepared> = channels
        .iter()
        .map(|ch| Prepared {
            kraus: ch.operators().to_vec(),
            effects: ch.operators().iter().map(|k| &k.adjoint() * k).collect(),
        })
        .collect();
    let seeder = Seeder::new(seed);
    let empty: Vec<PartyStats> = prepared
        .iter()
        .map(|p| PartyStats::empty(ens.len(), p.kraus.len()))
        .collect();

    let shards = (shards as u64).min(trials);
    let chunk = trials.div_ceil(shards);
    let parties = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut acc = empty.clone();
            let end = ((s + 1) * chunk).min(trials);
            for t in s * chunk..end {
                run_trial(ens, &prepared, &mut seeder.stream(t), &mut acc);
            }
            acc
        })
        .reduce(
            || empty.clone(),
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    x.merge(y);
                }
                a
            },
        );
    Ok(SampleStats {
        seed,
        trials,
        parties,
    })
}

fn pick<R: Rng>(rng: &mut R, weights: impl Iterator<Item = f64>) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last_positive
}

fn run_trial<R: Rng>(ens: &Ensemble, parties: &[Prepared], rng: &mut R, acc: &mut [PartyStats]) {
    let label = pick(rng, ens.priors().iter().copied());
    let mut rho = ens.states()[label].matrix().clone();
    for (party, stats) in parties.iter().zip(acc.iter_mut()) {
        let probs: Vec<f64> = party
            .effects
            .iter()
            .map(|e| (e * &rho).trace().re.max(0.0))
            .collect();
        let total: f64 = probs.iter().sum();
        let outcome = pick(rng, probs.iter().map(|p| p / total));
        stats.joint[label][outcome] += 1;
        let post = party.kraus[outcome].sandwich(&rho);
        let tr = post.trace().re;
        rho = post.scale(1.0 / tr);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{gu_ensemble, gu_state, two_state_ensemble, KrausChannel};
    use std::f64::consts::PI;

    fn trine_channel() -> KrausChannel {
        let r = (2.0f64 / 3.0).sqrt();
        let mut ops = vec![ComplexMatrix::zeros(2)];
        ops.extend((1..=3).map(|k| gu_state(3, k).unwrap().projector().scale(r)));
        KrausChannel::new(ops).unwrap()
    }

    #[test]
    fn deterministic_and_shard_independent() {
        let ens = gu_ensemble(3).unwrap();
        let ch = [trine_channel(), trine_channel()];
        let a = sample_run_with_shards(&ens, &ch, 9, 2001, 1).unwrap();
        let b = sample_run_with_shards(&ens, &ch, 9, 2001, 7).unwrap();
        let c = sample_run(&ens, &ch, 9, 2001).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        let d = sample_run_with_shards(&ens, &ch, 10, 2001, 1).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn trine_confidence_two_thirds() {
        let ens = gu_ensemble(3).unwrap();
        let stats = sample_run(&ens, &[trine_channel()], 2024, 100_000).unwrap();
        let p = &stats.parties[0];
        assert_eq!(p.trials(), 100_000);
        assert_eq!(p.outcome_count(0), 0);
        for x in 1..=3 {
            let c = p.confidence(x).unwrap();
            assert!((c - 2.0 / 3.0).abs() <= 3.0 * p.std_error(x).unwrap());
        }
    }

    #[test]
    fn orthogonal_states_confidence_one() {
        let ens = two_state_ensemble(1.0, PI / 2.0).unwrap();
        let a = crate::quantum::two_state_vector(PI / 2.0, 1).unwrap();
        let b = crate::quantum::two_state_vector(PI / 2.0, 2).unwrap();
        let ch = KrausChannel::new(vec![ComplexMatrix::zeros(2), a.projector(), b.projector()]).unwrap();
        let stats = sample_run(&ens, &[ch], 1, 100_000).unwrap();
        assert_eq!(stats.parties[0].confidence(1), Some(1.0));
        assert_eq!(stats.parties[0].confidence(2), Some(1.0));
    }

    #[test]
    fn rejects_zero_trials() {
        let ens = gu_ensemble(3).unwrap();
        assert!(sample_run(&ens, &[], 1, 0).is_err());
    }
}
