//! Confidence decay of geometric-uniform ensembles under constant-rate weak
//! measurements.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use seqmc_core::quantum::{bloch_from_density, gu_ensemble, sample_run};
use seqmc_core::sequential::{run_sequential, Policy, RunConfig, TargetPolicy, Termination};
use seqmc_core::weak::{
    gu_bloch_length, gu_sequential_confidence, max_parties_gu, parties_by_iteration_gu,
};

use super::{check_sampled, point_seed, pooled_confidence, Outcome};
use crate::checks::Checker;
use crate::config::{ExperimentConfig, GuParams};
use crate::error::CliError;
use crate::report::{extended_f64, fmt_f64, fmt_opt, render_csv, render_json, TableRow};

const ITERATION_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuRow {
    pub n: usize,
    pub j: usize,
    pub eta0: f64,
    pub confidence_formula: Option<f64>,
    /// Smallest confidence after propagating the ensemble through the channels.
    pub confidence_propagated: Option<f64>,
    pub confidence_empirical: Option<f64>,
    pub confidence_empirical_se: Option<f64>,
    /// Bloch-vector length of each propagated state.
    pub bloch_length: Option<f64>,
    #[serde(default, with = "option_extended")]
    pub party_bound: Option<f64>,
    pub parties_admissible: Option<u64>,
}

mod option_extended {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::extended_f64")] f64);

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        x.map(Wrap).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

impl TableRow for GuRow {
    const HEADER: &'static [&'static str] = &[
        "n",
        "j",
        "eta0",
        "C_formula",
        "C_propagated",
        "C_empirical",
        "C_empirical_se",
        "bloch_length",
        "R_bound",
        "R_admissible",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.j.to_string(),
            fmt_f64(self.eta0),
            fmt_opt(self.confidence_formula),
            fmt_opt(self.confidence_propagated),
            fmt_opt(self.confidence_empirical),
            fmt_opt(self.confidence_empirical_se),
            fmt_opt(self.bloch_length),
            fmt_opt(self.party_bound),
            self.parties_admissible.map(|r| r.to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuReport {
    pub config: Value,
    pub rows: Vec<GuRow>,
}

pub fn run(cfg: &ExperimentConfig, params: &GuParams) -> Result<Outcome, CliError> {
    let combos: Vec<(usize, f64)> = params
        .n
        .iter()
        .flat_map(|&n| params.eta0.iter().map(move |&e| (n, e)))
        .collect();
    let results: Vec<(Vec<GuRow>, Checker)> = combos
        .par_iter()
        .enumerate()
        .map(|(i, &(n, eta0))| {
            let sampling = (cfg.trials > 0).then(|| (point_seed(cfg.seed_or_zero(), i), cfg.trials));
            evaluate(n, eta0, params, cfg.delta, sampling)
        })
        .collect();

    let mut checks = Checker::new();
    let mut rows = Vec::new();
    for (r, c) in results {
        rows.extend(r);
        checks.merge(c);
    }
    let report = GuReport {
        config: cfg.to_value(),
        rows,
    };
    Ok(Outcome {
        csv: render_csv(&report.rows)?,
        json: render_json(&report)?,
        checks,
    })
}

fn evaluate(
    n: usize,
    eta0: f64,
    params: &GuParams,
    delta: f64,
    sampling: Option<(u64, u64)>,
) -> (Vec<GuRow>, Checker) {
    let mut rows = Vec::new();
    let mut checks = Checker::new();
    let ctx = format!("n={n}, eta0={eta0}");
    if let Err(e) = fill(n, eta0, params, delta, sampling, &mut rows, &mut checks) {
        checks.error("evaluation", Some(ctx), e.to_string());
    }
    (rows, checks)
}

fn fill(
    n: usize,
    eta0: f64,
    params: &GuParams,
    delta: f64,
    sampling: Option<(u64, u64)>,
    rows: &mut Vec<GuRow>,
    checks: &mut Checker,
) -> seqmc_core::Result<()> {
    let ens = gu_ensemble(n)?;
    let config = RunConfig {
        parties: params.parties,
        policy: Policy::Eta0(vec![eta0]),
        targets: TargetPolicy::LeastDisturbing,
        delta,
        confidence_threshold: None,
    };
    let run = run_sequential(&ens, &config)?;
    let ctx = |j: usize| Some(format!("n={n}, eta0={eta0}, j={j}"));
    if let Termination::ConstructionFailed { party, message } = &run.termination {
        checks.error("evaluation", ctx(*party), message.clone());
    }

    let bound = match params.confidence_threshold {
        Some(c_th) => {
            let b = max_parties_gu(n, c_th, eta0)?;
            let it = parties_by_iteration_gu(n, c_th, eta0, ITERATION_CAP);
            let expected = b.admissible.map_or(Value::Null, Value::from);
            let actual = it.map_or(Value::Null, Value::from);
            checks.holds(
                "bound_matches_iteration",
                Some(format!("n={n}, eta0={eta0}, c_th={c_th}")),
                b.admissible == it,
                expected,
                actual,
            );
            Some(b)
        }
        None => None,
    };

    let sampled = match sampling {
        Some((seed, trials)) => Some(sample_run(&ens, &run.instruments()?, seed, trials)?),
        None => None,
    };

    let rates = vec![eta0; params.parties];
    let mut previous: Option<f64> = None;
    for (idx, rec) in run.records.iter().enumerate() {
        let j = idx + 1;
        let formula = gu_sequential_confidence(n, &rates[..idx], j)?;
        let propagated = rec.min_confidence();
        for o in &rec.solution.outcomes {
            checks.close("propagation_matches_formula", ctx(j), formula, o.confidence, 1e-9);
        }
        if j == 1 {
            checks.close("first_party_confidence", ctx(j), 2.0 / n as f64, propagated, 1e-9);
        }
        if let Some(prev) = previous {
            if eta0 < 1.0 {
                checks.holds(
                    "strict_decay",
                    ctx(j),
                    propagated < prev,
                    format!("< {}", fmt_f64(prev)),
                    fmt_f64(propagated),
                );
            } else {
                checks.close("constant_without_measurement", ctx(j), prev, propagated, 1e-12);
            }
        }
        previous = Some(propagated);

        let length = gu_bloch_length(&rates[..idx])?;
        let mut measured = 0.0_f64;
        for state in rec.ensemble.states() {
            let v = bloch_from_density(state)?;
            let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            checks.close("bloch_length", ctx(j), length, l, 1e-10);
            measured = measured.max(l);
        }

        let estimate = sampled.as_ref().and_then(|s| pooled_confidence(&s.parties[idx]));
        // eta0 = 1 has no conclusive outcomes to sample.
        if sampled.is_some() && eta0 < 1.0 {
            check_sampled(checks, "sampled_confidence", ctx(j), formula, estimate);
        }
        rows.push(GuRow {
            n,
            j,
            eta0,
            confidence_formula: Some(formula),
            confidence_propagated: Some(propagated),
            confidence_empirical: estimate.map(|e| e.value),
            confidence_empirical_se: estimate.map(|e| e.std_error()),
            bloch_length: Some(measured),
            party_bound: bound.map(|b| b.bound),
            parties_admissible: bound.and_then(|b| b.admissible),
        });
    }
    Ok(())
}
