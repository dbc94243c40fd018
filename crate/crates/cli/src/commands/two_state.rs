//! Sweep of the two-state family over a `(p, theta)` grid.
//!
//! Every point compares the closed-form confidence with the generic solver
//! and the brute-force oracle, then compiles the least-disturbing channel for
//! the configured policy and measures the next party's overlap.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use seqmc_core::mc::{
    brute_force_confidence_qubit, certify_optimality, guessing_probability, solve_mc,
    two_state_confidence,
};
use seqmc_core::quantum::{propagate_ensemble, sample_run, two_state_ensemble};
use seqmc_core::sequential::{build_from_solution, check_dpi, overlap_growth, TargetPolicy};

use super::{check_sampled, point_seed, pooled_confidence, Outcome};
use crate::checks::Checker;
use crate::config::{ExperimentConfig, SweepPolicy, SweepPolicyKind, TwoStateParams};
use crate::error::CliError;
use crate::report::{fmt_f64, fmt_opt, render_csv, render_json, TableRow};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStateRow {
    pub p: f64,
    pub theta: f64,
    /// Closed form.
    pub confidence: Option<f64>,
    /// Smallest confidence from the generic solver.
    pub confidence_solver: Option<f64>,
    pub confidence_bruteforce: Option<f64>,
    pub guessing: Option<f64>,
    pub eta0: Option<f64>,
    pub overlap_in: Option<f64>,
    /// Measured on the next party's MC directions.
    pub overlap_out: Option<f64>,
    pub growth: Option<f64>,
    pub confidence_empirical: Option<f64>,
    pub confidence_empirical_se: Option<f64>,
}

impl TwoStateRow {
    fn new(p: f64, theta: f64) -> Self {
        Self {
            p,
            theta,
            confidence: None,
            confidence_solver: None,
            confidence_bruteforce: None,
            guessing: None,
            eta0: None,
            overlap_in: None,
            overlap_out: None,
            growth: None,
            confidence_empirical: None,
            confidence_empirical_se: None,
        }
    }
}

impl TableRow for TwoStateRow {
    const HEADER: &'static [&'static str] = &[
        "p",
        "theta",
        "C",
        "C_solver",
        "C_bruteforce",
        "G",
        "eta0",
        "s_in",
        "s_out",
        "T",
        "C_empirical",
        "C_empirical_se",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            fmt_f64(self.p),
            fmt_f64(self.theta),
            fmt_opt(self.confidence),
            fmt_opt(self.confidence_solver),
            fmt_opt(self.confidence_bruteforce),
            fmt_opt(self.guessing),
            fmt_opt(self.eta0),
            fmt_opt(self.overlap_in),
            fmt_opt(self.overlap_out),
            fmt_opt(self.growth),
            fmt_opt(self.confidence_empirical),
            fmt_opt(self.confidence_empirical_se),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStateReport {
    pub config: Value,
    pub rows: Vec<TwoStateRow>,
}

/// Per-point options shared across the grid.
#[derive(Clone, Copy, Debug)]
pub struct PointOptions {
    pub policy: SweepPolicy,
    /// 0 disables the brute-force oracle.
    pub brute_force_grid: usize,
    /// `(seed, trials)` for a Monte Carlo estimate of the first party.
    pub sampling: Option<(u64, u64)>,
}

pub fn run(cfg: &ExperimentConfig, params: &TwoStateParams) -> Result<Outcome, CliError> {
    let ps = params.p.values();
    let thetas = params.theta.values();
    let points: Vec<(f64, f64)> = ps
        .iter()
        .flat_map(|&p| thetas.iter().map(move |&t| (p, t)))
        .collect();
    let results: Vec<(TwoStateRow, Checker)> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(p, theta))| {
            let opts = PointOptions {
                policy: params.policy,
                brute_force_grid: params.brute_force_grid,
                sampling: (cfg.trials > 0).then(|| (point_seed(cfg.seed_or_zero(), i), cfg.trials)),
            };
            evaluate_point(p, theta, &opts)
        })
        .collect();

    let mut checks = Checker::new();
    let mut rows = Vec::with_capacity(results.len());
    for (row, c) in results {
        rows.push(row);
        checks.merge(c);
    }
    let report = TwoStateReport {
        config: cfg.to_value(),
        rows,
    };
    Ok(Outcome {
        csv: render_csv(&report.rows)?,
        json: render_json(&report)?,
        checks,
    })
}

/// Evaluates one grid point; failures become failed checks.
pub fn evaluate_point(p: f64, theta: f64, opts: &PointOptions) -> (TwoStateRow, Checker) {
    let mut row = TwoStateRow::new(p, theta);
    let mut checks = Checker::new();
    let ctx = format!("p={p}, theta={theta}");
    if let Err(e) = fill(&mut row, &mut checks, &ctx, opts) {
        checks.error("evaluation", Some(ctx), e.to_string());
    }
    (row, checks)
}

fn fill(
    row: &mut TwoStateRow,
    checks: &mut Checker,
    ctx: &str,
    opts: &PointOptions,
) -> seqmc_core::Result<()> {
    let at = || Some(ctx.to_string());
    let (p, theta) = (row.p, row.theta);
    let ens = two_state_ensemble(p, theta)?;
    let c = two_state_confidence(p, theta)?;
    row.confidence = Some(c);

    let sol = solve_mc(&ens)?;
    let solver = sol.confidences();
    row.confidence_solver = Some(solver.iter().copied().fold(f64::INFINITY, f64::min));
    for &cx in &solver {
        checks.close("solver_matches_closed_form", at(), c, cx, 1e-6);
    }
    let cert = certify_optimality(&ens, &sol)?;
    checks.at_least("certificate_min_eigenvalue", at(), cert.worst_min_eigenvalue(), -1e-8);
    checks.at_most("certificate_slackness", at(), cert.worst_slackness(), 1e-8);

    if opts.brute_force_grid > 0 {
        let mut worst = f64::INFINITY;
        for x in 1..=2 {
            let b = brute_force_confidence_qubit(&ens, x, opts.brute_force_grid)?;
            checks.close("bruteforce_matches_closed_form", at(), c, b, 1e-4);
            checks.at_most("bruteforce_below_optimum", at(), b, c + 1e-9);
            worst = worst.min(b);
        }
        row.confidence_bruteforce = Some(worst);
    }
    if p == 1.0 {
        checks.close("unambiguous_limit", at(), 1.0, c, 1e-9);
    }
    if (theta - FRAC_PI_2).abs() < 1e-12 {
        checks.close("orthogonal_limit", at(), (1.0 + p) / 2.0, c, 1e-9);
    }

    let s_in = sol.max_overlap();
    row.overlap_in = Some(s_in);
    let d2 = 1.0 - s_in * s_in;
    let c_max = sol.max_equal_weight()?;
    let weight = match opts.policy.kind {
        SweepPolicyKind::ConclusiveFraction => opts.policy.value * c_max,
        SweepPolicyKind::Eta0 => (1.0 - opts.policy.value) / d2,
        SweepPolicyKind::Guessing => opts.policy.value / (c * d2),
    };
    let weighted = sol.with_weights(&[weight, weight])?;
    let guess = guessing_probability(&ens, &weighted);
    row.guessing = Some(guess.g);
    row.eta0 = Some(guess.eta0);
    checks.close("eta0_matches_weight", at(), 1.0 - weight * d2, guess.eta0, 1e-9);
    checks.close("guessing_matches_weight", at(), c * weight * d2, guess.g, 1e-9);

    let plan = build_from_solution(&weighted, &TargetPolicy::LeastDisturbing)?;
    checks.at_most("channel_completeness", at(), plan.completeness_defect(), 1e-9);
    for (a, cx) in plan.inconclusive_weights.iter().zip(&plan.weights) {
        checks.close("weight_relation", at(), d2, 1.0 / (a + cx), 1e-9);
    }
    let states = ens.states();
    let dpi = check_dpi(&states[0], &states[1], &plan.channel)?;
    checks.at_most("data_processing", at(), dpi.after, dpi.before + 1e-9);

    let next = propagate_ensemble(&plan.channel, &ens)?;
    let next_sol = solve_mc(&next)?;
    let s_out = next_sol.max_overlap();
    row.overlap_out = Some(s_out);
    for (&c1, &c2) in solver.iter().zip(&next_sol.confidences()) {
        checks.close("confidence_preserved", at(), c1, c2, 1e-8);
    }
    let growth = overlap_growth(weight, weight, s_in)?;
    row.growth = Some(growth.t);
    checks.close("overlap_growth", at(), growth.t * s_in, s_out, 1e-9);
    checks.close("tradeoff", at(), s_in, guess.eta0 * s_out, 1e-8);

    if let Some((seed, trials)) = opts.sampling {
        let stats = sample_run(&ens, std::slice::from_ref(&plan.channel), seed, trials)?;
        let est = pooled_confidence(&stats.parties[0]);
        row.confidence_empirical = est.map(|e| e.value);
        row.confidence_empirical_se = est.map(|e| e.std_error());
        check_sampled(checks, "sampled_confidence", at(), c, est);
    }
    Ok(())
}
