//! A single multi-party run with its transcript and verification block.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use seqmc_core::mc::certify_optimality;
use seqmc_core::quantum::{gu_ensemble, sample_run, two_state_ensemble, SampleStats};
use seqmc_core::sequential::{
    check_dpi, max_parties_two_state, run_sequential, Policy, RunConfig, TargetPolicy, Termination,
};
use seqmc_core::{DensityOperator, Ensemble, SequentialRun};

use super::{check_sampled, outcome_estimate, pooled_confidence, Outcome};
use crate::checks::Checker;
use crate::config::{EnsembleSpec, ExperimentConfig, PolicyKind, SequentialParams, Targets};
use crate::error::CliError;
use crate::report::{fmt_f64, fmt_opt, render_csv, render_json, TableRow};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartyRow {
    pub j: usize,
    pub confidence_min: f64,
    pub confidence_max: f64,
    pub eta0: f64,
    pub overlap: f64,
    pub guessing: f64,
    pub independent: bool,
    pub strength: Option<f64>,
    /// Pooled over outcomes.
    pub confidence_empirical: Option<f64>,
    pub eta0_empirical: Option<f64>,
}

impl TableRow for PartyRow {
    const HEADER: &'static [&'static str] = &[
        "j",
        "C_min",
        "C_max",
        "eta0",
        "s",
        "G",
        "independent",
        "strength",
        "C_empirical",
        "eta0_empirical",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.j.to_string(),
            fmt_f64(self.confidence_min),
            fmt_f64(self.confidence_max),
            fmt_f64(self.eta0),
            fmt_f64(self.overlap),
            fmt_f64(self.guessing),
            self.independent.to_string(),
            fmt_opt(self.strength),
            fmt_opt(self.confidence_empirical),
            fmt_opt(self.eta0_empirical),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequentialReport {
    pub config: Value,
    pub rows: Vec<PartyRow>,
    pub run: SequentialRun,
    pub sampling: Option<SampleStats>,
}

pub fn build_ensemble(spec: &EnsembleSpec) -> Result<Ensemble, CliError> {
    Ok(match spec {
        EnsembleSpec::TwoState { p, theta } => two_state_ensemble(*p, *theta)?,
        EnsembleSpec::Gu { n } => gu_ensemble(*n)?,
        EnsembleSpec::Custom { priors, states } => {
            let states = states
                .iter()
                .map(|s| serde_json::from_value::<DensityOperator>(s.clone()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| {
                    CliError::Schema(vec![crate::schema::Violation::new(
                        "/params/ensemble/states",
                        e.to_string(),
                    )])
                })?;
            Ensemble::new("custom", priors.clone(), states)?
        }
    })
}

pub fn run_config(params: &SequentialParams, delta: f64) -> RunConfig {
    let values = params.policy.values.clone();
    RunConfig {
        parties: params.parties,
        policy: match params.policy.kind {
            PolicyKind::Eta0 => Policy::Eta0(values),
            PolicyKind::Guessing => Policy::Guessing(values),
            PolicyKind::FixedWeight => Policy::FixedWeight(values),
        },
        targets: match params.targets {
            Targets::LeastDisturbing => TargetPolicy::LeastDisturbing,
            Targets::Gram => TargetPolicy::Gram,
        },
        delta,
        confidence_threshold: params.confidence_threshold,
    }
}

pub fn run(cfg: &ExperimentConfig, params: &SequentialParams) -> Result<Outcome, CliError> {
    let ens = build_ensemble(&params.ensemble)?;
    let config = run_config(params, cfg.delta);
    let run = run_sequential(&ens, &config)?;
    let mut checks = Checker::new();
    verify_run(&ens, params, &config, &run, &mut checks)?;

    let sampling = match (cfg.trials, run.records.is_empty()) {
        (0, _) | (_, true) => None,
        (trials, false) => Some(sample_run(&ens, &run.instruments()?, cfg.seed_or_zero(), trials)?),
    };
    let mut rows = Vec::with_capacity(run.records.len());
    for (idx, rec) in run.records.iter().enumerate() {
        let confidences = rec.solution.confidences();
        let stats = sampling.as_ref().map(|s| &s.parties[idx]);
        if let Some(st) = stats {
            for (x, &c) in confidences.iter().enumerate() {
                let est = outcome_estimate(st, x + 1);
                check_sampled(
                    &mut checks,
                    "sampled_confidence",
                    Some(format!("party {}, outcome {}", idx + 1, x + 1)),
                    c,
                    est,
                );
            }
        }
        rows.push(PartyRow {
            j: rec.index,
            confidence_min: rec.min_confidence(),
            confidence_max: confidences.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            eta0: rec.eta0,
            overlap: rec.overlap,
            guessing: rec.guessing.g,
            independent: rec.independent,
            strength: rec.strength,
            confidence_empirical: stats.and_then(pooled_confidence).map(|e| e.value),
            eta0_empirical: stats.map(|s| s.eta0()),
        });
    }

    let report = SequentialReport {
        config: cfg.to_value(),
        rows,
        run,
        sampling,
    };
    Ok(Outcome {
        csv: render_csv(&report.rows)?,
        json: render_json(&report)?,
        checks,
    })
}

/// Verification block for a finished run.
pub fn verify_run(
    ens: &Ensemble,
    params: &SequentialParams,
    config: &RunConfig,
    run: &SequentialRun,
    checks: &mut Checker,
) -> Result<(), CliError> {
    let party = |j: usize| Some(format!("party {j}"));
    if let Termination::ConstructionFailed { party: j, message } = &run.termination {
        checks.error("construction", party(*j), message.clone());
    }
    for rec in &run.records {
        let cert = certify_optimality(&rec.ensemble, &rec.solution)?;
        checks.at_least("certificate_min_eigenvalue", party(rec.index), cert.worst_min_eigenvalue(), -1e-8);
        checks.at_most("certificate_slackness", party(rec.index), cert.worst_slackness(), 1e-8);
        if let Some(ch) = &rec.channel {
            checks.at_most("channel_completeness", party(rec.index), ch.completeness_defect(), 1e-9);
            let st = rec.ensemble.states();
            for a in 0..st.len() {
                for b in a + 1..st.len() {
                    let dpi = check_dpi(&st[a], &st[b], ch)?;
                    checks.at_most("data_processing", party(rec.index), dpi.after, dpi.before + 1e-9);
                }
            }
        }
        // The decomposition is an identity of the two-state family only.
        if let (Some(res), EnsembleSpec::TwoState { .. }) = (rec.decomposition_residual, &params.ensemble) {
            checks.at_most("complementary_decomposition", party(rec.index), res, 1e-8);
        }
    }

    let independent = run.records.iter().all(|r| r.independent);
    if independent {
        if let Some(first) = run.records.first() {
            for rec in &run.records[1..] {
                for (a, b) in first.solution.outcomes.iter().zip(&rec.solution.outcomes) {
                    checks.close(
                        "equal_confidence",
                        Some(format!("party {}, outcome {}", rec.index, b.label)),
                        a.confidence,
                        b.confidence,
                        1e-8,
                    );
                }
            }
        }
    } else {
        for w in run.records.windows(2) {
            let (prev, next) = (w[0].min_confidence(), w[1].min_confidence());
            if w[0].strength.is_some_and(|e| e > 0.0) {
                checks.holds(
                    "strict_decay",
                    party(w[1].index),
                    next < prev,
                    format!("< {}", fmt_f64(prev)),
                    fmt_f64(next),
                );
            } else {
                checks.at_most("non_increasing", party(w[1].index), next, prev + 1e-8);
            }
        }
    }

    let two_qubit_states = ens.len() == 2 && ens.dim() == 2;
    if two_qubit_states && independent {
        for (k, res) in run.tradeoff_residuals().into_iter().enumerate() {
            checks.at_most("tradeoff_recursion", party(k + 1), res, 1e-8);
        }
        two_state_bound_check(params, config, run, checks);
    }
    Ok(())
}

/// With a constant `eta0` the record count cannot exceed the bound, and an
/// overlap stop happens exactly after `admissible + 1` parties.
fn two_state_bound_check(
    params: &SequentialParams,
    config: &RunConfig,
    run: &SequentialRun,
    checks: &mut Checker,
) {
    let (PolicyKind::Eta0, [eta0]) = (params.policy.kind, params.policy.values.as_slice()) else {
        return;
    };
    if params.targets != Targets::LeastDisturbing || config.confidence_threshold.is_some() {
        return;
    }
    let Some(first) = run.records.first() else {
        return;
    };
    let Ok(bound) = max_parties_two_state(first.overlap, *eta0, config.delta) else {
        return;
    };
    let ctx = Some(format!("s1={}, eta0={eta0}, delta={}", first.overlap, config.delta));
    let recorded = run.records.len() as u64;
    if let Some(adm) = bound.admissible {
        checks.at_most("party_bound", ctx.clone(), recorded as f64, (adm + 1) as f64);
        if matches!(run.termination, Termination::OverlapNearOne { .. }) {
            checks.close("bound_termination", ctx, (adm + 1) as f64, recorded as f64, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunPolicy;

    fn params(spec: EnsembleSpec, parties: usize, eta0: f64) -> SequentialParams {
        SequentialParams {
            ensemble: spec,
            parties,
            policy: RunPolicy {
                kind: PolicyKind::Eta0,
                values: vec![eta0],
            },
            targets: Targets::LeastDisturbing,
            confidence_threshold: None,
        }
    }

    fn checked(p: &SequentialParams, delta: f64) -> (SequentialRun, Checker) {
        let ens = build_ensemble(&p.ensemble).unwrap();
        let cfg = run_config(p, delta);
        let run = run_sequential(&ens, &cfg).unwrap();
        let mut checks = Checker::new();
        verify_run(&ens, p, &cfg, &run, &mut checks).unwrap();
        (run, checks)
    }

    #[test]
    fn two_state_runs_keep_confidence() {
        let p = params(EnsembleSpec::TwoState { p: 0.8, theta: 1.0 }, 3, 0.9);
        let (run, checks) = checked(&p, 1e-3);
        assert!(checks.passed(), "{:#?}", checks.report().failures);
        assert_eq!(run.records.len(), 3);
    }

    #[test]
    fn trine_decays() {
        let p = params(EnsembleSpec::Gu { n: 3 }, 4, 0.6);
        let (run, checks) = checked(&p, 1e-3);
        assert!(checks.passed(), "{:#?}", checks.report().failures);
        let c = run.confidences();
        assert!(c.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn budget_above_bound_terminates_on_overlap() {
        // 1 - delta stays below eta0, so every step remains feasible.
        let p = params(EnsembleSpec::TwoState { p: 0.9, theta: 1.0 }, 40, 0.97);
        let (run, checks) = checked(&p, 0.05);
        assert!(checks.passed(), "{:#?}", checks.report().failures);
        assert!(matches!(run.termination, Termination::OverlapNearOne { .. }));
        let r = checks.report();
        assert!(r.summary.iter().any(|s| s.check == "bound_termination"));
    }

    #[test]
    fn custom_ensemble_from_matrices() {
        let spec: EnsembleSpec = serde_json::from_value(serde_json::json!({
            "family": "custom",
            "priors": [0.5, 0.5],
            "states": [
                [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
                [[[0.5, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.5, 0.0]]]
            ]
        }))
        .unwrap();
        let ens = build_ensemble(&spec).unwrap();
        assert_eq!((ens.len(), ens.dim()), (2, 2));
        let bad = EnsembleSpec::Custom {
            priors: vec![1.0],
            states: vec![serde_json::json!([[[1.0, 0.0]], [[0.0, 0.0]]])],
        };
        assert!(matches!(build_ensemble(&bad), Err(CliError::Schema(_))));
    }
}
