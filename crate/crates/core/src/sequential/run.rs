//! Multi-party sequential runs.

use serde::{Deserialize, Serialize};

use super::{build_from_solution, ChannelPlan, TargetPolicy};
use crate::error::{out_of_range, Result};
use crate::linalg::{numerical_rank, ComplexMatrix};
use crate::mc::{guessing_probability, solve_mc, Guessing, MCSolution};
use crate::quantum::{propagate_ensemble, Ensemble, KrausChannel};
use crate::tol;
use crate::weak::{weak_channel, weaken_povm, WeakGauge};

/// Per-party schedule; party `j` uses entry `j - 1`, the last entry repeating.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum Policy {
    /// Inconclusive rate `eta0`.
    Eta0(Vec<f64>),
    /// Guessing probability `G`.
    Guessing(Vec<f64>),
    /// Equal conclusive weight `c`.
    FixedWeight(Vec<f64>),
}

impl Policy {
    fn values(&self) -> &[f64] {
        match self {
            Policy::Eta0(v) | Policy::Guessing(v) | Policy::FixedWeight(v) => v,
        }
    }

    fn at(&self, j: usize) -> f64 {
        let v = self.values();
        v[(j - 1).min(v.len() - 1)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub parties: usize,
    pub policy: Policy,
    pub targets: TargetPolicy,
    /// Stop before a party whose direction overlap is at least `1 - delta`.
    pub delta: f64,
    /// Stop before a party whose smallest confidence is at most this, within
    /// `tol::CONFIDENCE_EQUALITY`.
    pub confidence_threshold: Option<f64>,
}

impl RunConfig {
    /// Equal `eta0` for every party, least-disturbing targets, `delta = 1e-3`.
    pub fn equal_eta0(parties: usize, eta0: f64) -> Self {
        Self {
            parties,
            policy: Policy::Eta0(vec![eta0]),
            targets: TargetPolicy::LeastDisturbing,
            delta: 1e-3,
            confidence_threshold: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Termination {
    BudgetReached,
    ConfidenceBelowThreshold { party: usize, confidence: f64 },
    OverlapNearOne { party: usize, overlap: f64 },
    ConstructionFailed { party: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartyRecord {
    pub index: usize,
    pub ensemble: Ensemble,
    /// Directions with the weights actually measured.
    pub solution: MCSolution,
    pub eta0: f64,
    /// Largest off-diagonal `|<m_i|m_j>|`.
    pub overlap: f64,
    pub overlap_matrix: Vec<Vec<f64>>,
    pub guessing: Guessing,
    /// Conclusive directions are linearly independent.
    pub independent: bool,
    /// Weak-measurement strength when directions are dependent.
    pub strength: Option<f64>,
    /// Independent regime only.
    pub plan: Option<ChannelPlan>,
    /// Channel to the next party; absent for the last party.
    pub channel: Option<KrausChannel>,
    /// Max-abs defect of `rho_1 = C|phi_1><phi_1| + (1-C)|phi_2><phi_2|`
    /// with `phi_1 = m_2^perp`, `phi_2 = m_1^perp` (two qubit states only).
    pub decomposition_residual: Option<f64>,
}

impl PartyRecord {
    pub fn min_confidence(&self) -> f64 {
        self.solution
            .confidences()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Instrument realising this party's measurement: the inter-party
    /// channel when present, otherwise the square-root instrument.
    pub fn instrument(&self) -> Result<KrausChannel> {
        match &self.channel {
            Some(ch) => Ok(ch.clone()),
            None => self.solution.povm().sqrt_instrument(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequentialRun {
    pub records: Vec<PartyRecord>,
    pub termination: Termination,
}

impl SequentialRun {
    pub fn confidences(&self) -> Vec<f64> {
        self.records.iter().map(PartyRecord::min_confidence).collect()
    }

    pub fn eta0s(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.eta0).collect()
    }

    pub fn overlaps(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.overlap).collect()
    }

    /// `|eta0^(j) s^(j+1) - s^(j)|` for consecutive parties.
    pub fn tradeoff_residuals(&self) -> Vec<f64> {
        self.records
            .windows(2)
            .map(|w| (w[0].eta0 * w[1].overlap - w[0].overlap).abs())
            .collect()
    }

    /// Spread of every outcome confidence across all parties.
    pub fn confidence_spread(&self) -> f64 {
        let all: Vec<f64> = self
            .records
            .iter()
            .flat_map(|r| r.solution.confidences())
            .collect();
        let max = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = all.iter().copied().fold(f64::INFINITY, f64::min);
        if all.is_empty() {
            0.0
        } else {
            max - min
        }
    }

    pub fn instruments(&self) -> Result<Vec<KrausChannel>> {
        self.records.iter().map(PartyRecord::instrument).collect()
    }
}

fn decomposition_residual(ens: &Ensemble, sol: &MCSolution) -> Option<f64> {
    if ens.len() != 2 || ens.dim() != 2 {
        return None;
    }
    let phi2 = sol.outcomes[0].direction.orthogonal_qubit().ok()?;
    let phi1 = sol.outcomes[1].direction.orthogonal_qubit().ok()?;
    let c = sol.outcomes[0].confidence;
    let model: ComplexMatrix = &phi1.projector().scale(c) + &phi2.projector().scale(1.0 - c);
    Some(model.max_abs_diff(ens.states()[0].matrix()))
}

/// `sum_x <m_x|rho|m_x>` and `sum_x C_x <m_x|rho|m_x>`.
fn direction_rates(ens: &Ensemble, sol: &MCSolution) -> (f64, f64) {
    let rho = ens.average();
    sol.outcomes.iter().fold((0.0, 0.0), |(s, g), o| {
        let e = rho.matrix().expectation(o.direction.amplitudes()).re;
        (s + e, g + o.confidence * e)
    })
}

struct Measured {
    solution: MCSolution,
    strength: Option<f64>,
    plan: Option<ChannelPlan>,
    channel: Option<KrausChannel>,
}

fn measure(
    ens: &Ensemble,
    base: &MCSolution,
    independent: bool,
    config: &RunConfig,
    j: usize,
    last: bool,
) -> Result<Measured> {
    let value = config.policy.at(j);
    let n = base.len();
    if independent {
        let (rate, weighted) = direction_rates(ens, base);
        let c = match config.policy {
            Policy::Eta0(_) => (1.0 - value) / rate,
            Policy::Guessing(_) => value / weighted,
            Policy::FixedWeight(_) => value,
        };
        let solution = base.with_weights(&vec![c; n])?;
        let plan = if last {
            None
        } else {
            Some(build_from_solution(&solution, &config.targets)?)
        };
        let channel = plan.as_ref().map(|p| p.channel.clone());
        Ok(Measured {
            solution,
            strength: None,
            plan,
            channel,
        })
    } else {
        let c_max = base.max_equal_weight()?;
        let base_g = guessing_probability(ens, base).g;
        let eps = match config.policy {
            Policy::Eta0(_) => 1.0 - value,
            Policy::Guessing(_) => value / base_g,
            Policy::FixedWeight(_) => value / c_max,
        };
        if !(0.0..=1.0).contains(&eps) {
            return Err(out_of_range(
                "policy",
                format!("weak-measurement strength {eps} not in [0, 1]"),
            ));
        }
        let solution = base.with_weights(&vec![eps * c_max; n])?;
        let channel = if last {
            None
        } else {
            let weak = weaken_povm(&base.povm(), eps)?;
            Some(weak_channel(&weak, &WeakGauge::Identity)?)
        };
        Ok(Measured {
            solution,
            strength: Some(eps),
            plan: None,
            channel,
        })
    }
}

/// Runs up to `config.parties` parties starting from `ens`.
///
/// Each party solves the MC problem on its own ensemble. Independent
/// directions are measured with weights from the policy and passed on
/// through a synthesised [`ChannelPlan`]; dependent ones are measured
/// weakly around the maximal equal-weight POVM. Construction errors end
/// the run and are recorded in [`Termination`].
pub fn run_sequential(ens: &Ensemble, config: &RunConfig) -> Result<SequentialRun> {
    if config.parties == 0 {
        return Err(out_of_range("parties", "must be at least 1"));
    }
    if config.policy.values().is_empty() {
        return Err(out_of_range("policy", "needs at least one value"));
    }
    if !(config.delta > 0.0 && config.delta < 1.0) {
        return Err(out_of_range("delta", format!("{} not in (0, 1)", config.delta)));
    }
    let mut records = Vec::with_capacity(config.parties);
    let mut current = ens.clone();
    for j in 1..=config.parties {
        let base = solve_mc(&current)?;
        let overlap = base.max_overlap();
        if ens.len() > 1 && overlap >= 1.0 - config.delta {
            return Ok(SequentialRun {
                records,
                termination: Termination::OverlapNearOne { party: j, overlap },
            });
        }
        let confidence = base.confidences().into_iter().fold(f64::INFINITY, f64::min);
        if let Some(th) = config.confidence_threshold {
            if confidence <= th + tol::CONFIDENCE_EQUALITY {
                return Ok(SequentialRun {
                    records,
                    termination: Termination::ConfidenceBelowThreshold { party: j, confidence },
                });
            }
        }
        let independent = numerical_rank(&base.directions()) == base.len();
        let last = j == config.parties;
        let measured = match measure(&current, &base, independent, config, j, last) {
            Ok(m) => m,
            Err(e) => {
                return Ok(SequentialRun {
                    records,
                    termination: Termination::ConstructionFailed {
                        party: j,
                        message: e.to_string(),
                    },
                })
            }
        };
        let guessing = guessing_probability(&current, &measured.solution);
        let next = match &measured.channel {
            Some(ch) => Some(propagate_ensemble(ch, &current)?),
            None => None,
        };
        records.push(PartyRecord {
            index: j,
            decomposition_residual: decomposition_residual(&current, &measured.solution),
            ensemble: current,
            eta0: guessing.eta0,
            overlap,
            overlap_matrix: measured.solution.overlap_matrix(),
            guessing,
            independent,
            strength: measured.strength,
            plan: measured.plan,
            channel: measured.channel,
            solution: measured.solution,
        });
        match next {
            Some(e) => current = e,
            None => break,
        }
    }
    Ok(SequentialRun {
        records,
        termination: Termination::BudgetReached,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::two_state_confidence;
    use crate::quantum::{gu_ensemble, two_state_ensemble};
    use crate::sequential::{max_parties_two_state, overlap_growth};
    use crate::weak::gu_sequential_confidence;
    use std::f64::consts::PI;

    #[test]
    fn single_party_builds_no_channel() {
        let ens = two_state_ensemble(0.8, PI / 3.0).unwrap();
        let run = run_sequential(&ens, &RunConfig::equal_eta0(1, 0.7)).unwrap();
        assert_eq!(run.records.len(), 1);
        assert!(run.records[0].channel.is_none());
        assert_eq!(run.termination, Termination::BudgetReached);
        assert!(run.instruments().unwrap()[0].completeness_defect() < 1e-9);
    }

    #[test]
    fn two_state_equal_confidence_and_tradeoff() {
        let (p, t) = (0.8, PI / 3.0);
        let ens = two_state_ensemble(p, t).unwrap();
        let run = run_sequential(&ens, &RunConfig::equal_eta0(4, 0.9)).unwrap();
        assert_eq!(run.records.len(), 4);
        let c = two_state_confidence(p, t).unwrap();
        for r in &run.records {
            for o in &r.solution.outcomes {
                assert!((o.confidence - c).abs() < 1e-8);
            }
            assert!((r.eta0 - 0.9).abs() < 1e-12);
            assert!(r.decomposition_residual.unwrap() < 1e-8);
        }
        for res in run.tradeoff_residuals() {
            assert!(res < 1e-8);
        }
        // The overlap follows the closed-form growth.
        let r1 = &run.records[0];
        let w = r1.solution.weights();
        let g = overlap_growth(w[0], w[1], r1.overlap).unwrap();
        assert!((g.overlap_out - run.records[1].overlap).abs() < 1e-9);
    }

    #[test]
    fn unambiguous_sequence_keeps_certainty() {
        let ens = two_state_ensemble(1.0, 1.2).unwrap();
        let run = run_sequential(&ens, &RunConfig::equal_eta0(3, 0.95)).unwrap();
        for c in run.confidences() {
            assert!((c - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn budget_past_the_bound_terminates_early() {
        let ens = two_state_ensemble(0.9, 1.0).unwrap();
        let s1 = 0.9 * 1.0f64.cos();
        // eta0 must stay above every overlap for M_0 to remain PSD.
        let eta0 = 0.97;
        let mut cfg = RunConfig::equal_eta0(40, eta0);
        cfg.delta = 0.05;
        let run = run_sequential(&ens, &cfg).unwrap();
        let bound = max_parties_two_state(s1, eta0, 0.05).unwrap();
        assert!(
            matches!(run.termination, Termination::OverlapNearOne { .. }),
            "{:?}",
            run.termination
        );
        assert_eq!(run.records.len() as u64, bound.admissible.unwrap() + 1);
    }

    #[test]
    fn gram_targets_also_preserve_confidence() {
        let ens = two_state_ensemble(0.6, 2.0).unwrap();
        let mut cfg = RunConfig::equal_eta0(3, 0.8);
        cfg.targets = TargetPolicy::Gram;
        let run = run_sequential(&ens, &cfg).unwrap();
        assert_eq!(run.records.len(), 3);
        assert!(run.confidence_spread() < 1e-8);
    }

    #[test]
    fn trine_decays_under_weak_measurement() {
        let ens = gu_ensemble(3).unwrap();
        let run = run_sequential(&ens, &RunConfig::equal_eta0(4, 0.5)).unwrap();
        assert_eq!(run.records.len(), 4);
        let cs = run.confidences();
        for (j, c) in cs.iter().enumerate() {
            let want = gu_sequential_confidence(3, &vec![0.5; j], j + 1).unwrap();
            assert!((c - want).abs() < 1e-9);
            assert!(!run.records[j].independent);
        }
        assert!(cs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn confidence_threshold_stops_gu_run() {
        let ens = gu_ensemble(3).unwrap();
        let mut cfg = RunConfig::equal_eta0(10, 0.0);
        cfg.confidence_threshold = Some(0.5);
        let run = run_sequential(&ens, &cfg).unwrap();
        assert_eq!(run.records.len(), 1);
        assert!(matches!(
            run.termination,
            Termination::ConfidenceBelowThreshold { party: 2, .. }
        ));
    }

    #[test]
    fn infeasible_policy_is_recorded() {
        let ens = two_state_ensemble(0.8, PI / 3.0).unwrap();
        let mut cfg = RunConfig::equal_eta0(3, 0.0);
        cfg.policy = Policy::FixedWeight(vec![5.0]);
        let run = run_sequential(&ens, &cfg).unwrap();
        assert!(run.records.is_empty());
        assert!(matches!(run.termination, Termination::ConstructionFailed { party: 1, .. }));
    }
}
