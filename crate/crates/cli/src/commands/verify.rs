//! Oracle suites bundled as one command: closed-form grid, seeded
//! certificates, data-processing draws, infeasibility rejections and an
//! optional Monte Carlo run. The data file is the check summary itself.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use seqmc_core::mc::{certify_optimality, solve_mc, two_state_directions};
use seqmc_core::quantum::random::{ginibre_state, random_channel, random_ensemble, Seeder};
use seqmc_core::quantum::{sample_run, two_state_ensemble};
use seqmc_core::sequential::{build_sequential_channel, check_dpi, run_sequential, RunConfig, TargetPolicy};
use seqmc_core::Error;

use super::two_state::{evaluate_point, PointOptions};
use super::{check_sampled, outcome_estimate, Outcome};
use crate::checks::{CheckSummary, Checker};
use crate::config::{ExperimentConfig, SweepPolicy, SweepPolicyKind, VerifyParams};
use crate::error::CliError;
use crate::report::{render_csv, render_json, TableRow};

/// Offset separating the data-processing streams from the certificate streams.
const DPI_STREAM_OFFSET: u64 = 1 << 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: Value,
    pub summary: Vec<CheckSummary>,
}

impl TableRow for CheckSummary {
    const HEADER: &'static [&'static str] = &[
        "check", "count", "failed", "relation", "expected", "actual", "tolerance", "passed",
    ];

    fn cells(&self) -> Vec<String> {
        let text = |v: &Value| match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n
                .as_f64()
                .map(crate::report::fmt_f64)
                .unwrap_or_else(|| n.to_string()),
            other => other.to_string(),
        };
        vec![
            self.check.clone(),
            self.count.to_string(),
            self.failed.to_string(),
            serde_json::to_value(self.worst.relation)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
            text(&self.worst.expected),
            text(&self.worst.actual),
            crate::report::fmt_opt(self.worst.tolerance),
            self.worst.passed.to_string(),
        ]
    }
}

pub fn run(cfg: &ExperimentConfig, params: &VerifyParams) -> Result<Outcome, CliError> {
    let seeder = Seeder::new(cfg.seed_or_zero());
    let mut checks = Checker::new();
    closed_form_grid(params, &mut checks);
    certificates(&seeder, params.certify_draws, &mut checks);
    data_processing(&seeder, params.dpi_draws, &mut checks);
    rejections(&mut checks)?;
    if cfg.trials > 0 {
        sampled_run(cfg.seed_or_zero(), cfg.trials, &mut checks)?;
    }

    let report = VerifyReport {
        config: cfg.to_value(),
        summary: checks.report().summary,
    };
    Ok(Outcome {
        csv: render_csv(&report.summary)?,
        json: render_json(&report)?,
        checks,
    })
}

/// `k x k` grid over `p in [0.05, 1]`, `theta in [0.1, pi - 0.1]` at three
/// conclusive fractions; the brute-force oracle runs at the middle one.
fn closed_form_grid(params: &VerifyParams, checks: &mut Checker) {
    let k = params.closed_form_grid;
    let axis = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (k - 1) as f64;
    let points: Vec<(f64, f64)> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (axis(0.05, 1.0, i), axis(0.1, PI - 0.1, j))))
        .collect();
    for (level, fraction) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        let opts = PointOptions {
            policy: SweepPolicy {
                kind: SweepPolicyKind::ConclusiveFraction,
                value: fraction,
            },
            brute_force_grid: if level == 1 { params.brute_force_grid } else { 0 },
            sampling: None,
        };
        let results: Vec<Checker> = points
            .par_iter()
            .map(|&(p, t)| evaluate_point(p, t, &opts).1)
            .collect();
        for c in results {
            checks.merge(c);
        }
    }
}

fn certificates(seeder: &Seeder, draws: usize, checks: &mut Checker) {
    let results: Vec<Checker> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut c = Checker::new();
            let ctx = Some(format!("certificate draw {i}"));
            let mut rng = seeder.stream(i as u64);
            let n = 2 + i % 3;
            let rank = 1 + (i / 3) % 2;
            let outcome = random_ensemble(&mut rng, 2, n, rank)
                .and_then(|ens| solve_mc(&ens).and_then(|sol| certify_optimality(&ens, &sol)));
            match outcome {
                Ok(cert) => {
                    c.at_least("random_certificate_min_eigenvalue", ctx.clone(), cert.worst_min_eigenvalue(), -1e-8);
                    c.at_most("random_certificate_slackness", ctx, cert.worst_slackness(), 1e-8);
                }
                Err(e) => {
                    c.error("random_certificate", ctx, e.to_string());
                }
            }
            c
        })
        .collect();
    for c in results {
        checks.merge(c);
    }
}

fn data_processing(seeder: &Seeder, draws: usize, checks: &mut Checker) {
    let results: Vec<Checker> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut c = Checker::new();
            let ctx = Some(format!("dpi draw {i}"));
            let mut rng = seeder.stream(DPI_STREAM_OFFSET + i as u64);
            let d = 2 + i % 3;
            let outcome = (|| {
                let r1 = ginibre_state(&mut rng, d, 1 + i % d)?;
                let r2 = ginibre_state(&mut rng, d, 1 + (i / 3) % d)?;
                let ch = random_channel(&mut rng, d, 1 + i % 4)?;
                check_dpi(&r1, &r2, &ch)
            })();
            match outcome {
                Ok(r) => {
                    c.at_most("random_data_processing", ctx, r.after, r.before + 1e-9);
                }
                Err(e) => {
                    c.error("random_data_processing", ctx, e.to_string());
                }
            }
            c
        })
        .collect();
    for c in results {
        checks.merge(c);
    }
}

/// Weights past the feasible region must be refused with the violated quantity.
fn rejections(checks: &mut Checker) -> Result<(), CliError> {
    let (p, theta) = (0.8, 1.0);
    let sol = solve_mc(&two_state_ensemble(p, theta)?)?;
    let c_max = sol.max_equal_weight()?;
    let result = sol.with_weights(&[1.05 * c_max, 1.05 * c_max]);
    checks.holds(
        "rejects_non_psd_inconclusive",
        Some(format!("c = 1.05 c_max at p={p}, theta={theta}")),
        matches!(result, Err(Error::InfeasibleWeights { min_eigenvalue }) if min_eigenvalue < 0.0),
        "InfeasibleWeights with negative eigenvalue",
        format!("{result:?}").chars().take(120).collect::<String>(),
    );

    let dirs = two_state_directions(p, theta)?.to_vec();
    let s = sol.max_overlap();
    let inv_d2 = 1.0 / (1.0 - s * s);
    let result = build_sequential_channel(&dirs, &[inv_d2 + 0.01, 0.1], &TargetPolicy::Gram);
    checks.holds(
        "rejects_negative_inconclusive_weight",
        Some(format!("c_1 = 1/D^2 + 0.01 at p={p}, theta={theta}")),
        matches!(result, Err(Error::WeightsTooLarge { value, .. }) if value < 0.0),
        "WeightsTooLarge with negative a_x",
        format!("{:?}", result.err()),
    );
    Ok(())
}

fn sampled_run(seed: u64, trials: u64, checks: &mut Checker) -> Result<(), CliError> {
    let ens = two_state_ensemble(0.8, PI / 3.0)?;
    let run = run_sequential(&ens, &RunConfig::equal_eta0(4, 0.9))?;
    let stats = sample_run(&ens, &run.instruments()?, seed, trials)?;
    for (idx, rec) in run.records.iter().enumerate() {
        let st = &stats.parties[idx];
        for o in &rec.solution.outcomes {
            let est = outcome_estimate(st, o.label);
            check_sampled(
                checks,
                "sampled_confidence",
                Some(format!("party {}, outcome {}", rec.index, o.label)),
                o.confidence,
                est,
            );
        }
    }
    Ok(())
}
