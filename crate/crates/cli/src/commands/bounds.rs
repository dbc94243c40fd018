//! Party-count bounds against direct iteration of the per-party recursions.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use seqmc_core::sequential::{max_parties_two_state, parties_by_iteration_two_state, PartyBound};
use seqmc_core::weak::{max_parties_gu, parties_by_iteration_gu};

use super::Outcome;
use crate::checks::Checker;
use crate::config::{BoundsParams, ExperimentConfig};
use crate::error::CliError;
use crate::report::{extended_f64, fmt_f64, fmt_opt, render_csv, render_json, TableRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    TwoState,
    Gu,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub family: Family,
    pub n: Option<usize>,
    pub s1: Option<f64>,
    pub confidence_threshold: Option<f64>,
    pub eta0: f64,
    pub delta: Option<f64>,
    #[serde(with = "extended_f64")]
    pub bound: f64,
    pub admissible: Option<u64>,
    pub iteration: Option<u64>,
    /// Set when the parameters are outside the bound's domain.
    pub note: Option<String>,
}

impl TableRow for BoundRow {
    const HEADER: &'static [&'static str] = &[
        "family",
        "n",
        "s1",
        "C_th",
        "eta0",
        "delta",
        "R_bound",
        "R_admissible",
        "R_iteration",
        "note",
    ];

    fn cells(&self) -> Vec<String> {
        let int = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        vec![
            match self.family {
                Family::TwoState => "two_state".into(),
                Family::Gu => "gu".into(),
            },
            self.n.map(|v| v.to_string()).unwrap_or_default(),
            fmt_opt(self.s1),
            fmt_opt(self.confidence_threshold),
            fmt_f64(self.eta0),
            fmt_opt(self.delta),
            fmt_f64(self.bound),
            int(self.admissible),
            int(self.iteration),
            self.note.clone().unwrap_or_default(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub config: Value,
    pub rows: Vec<BoundRow>,
}

pub fn run(cfg: &ExperimentConfig, params: &BoundsParams) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    let mut checks = Checker::new();
    let cap = params.iteration_cap;

    if let Some(ts) = &params.two_state {
        for s1 in ts.s1.values() {
            for eta0 in ts.eta0.values() {
                for delta in ts.delta.values() {
                    let result = max_parties_two_state(s1, eta0, delta);
                    let iteration = result
                        .is_ok()
                        .then(|| parties_by_iteration_two_state(s1, eta0, delta, cap))
                        .flatten();
                    let ctx = format!("s1={s1}, eta0={eta0}, delta={delta}");
                    let mut row = BoundRow {
                        family: Family::TwoState,
                        n: None,
                        s1: Some(s1),
                        confidence_threshold: None,
                        eta0,
                        delta: Some(delta),
                        bound: f64::NAN,
                        admissible: None,
                        iteration,
                        note: None,
                    };
                    record(&mut row, result, cap, ctx, &mut checks);
                    rows.push(row);
                }
            }
        }
    }

    if let Some(gu) = &params.gu {
        for &n in &gu.n {
            for c_th in gu.confidence_threshold.values() {
                for eta0 in gu.eta0.values() {
                    let result = max_parties_gu(n, c_th, eta0);
                    let iteration = result
                        .is_ok()
                        .then(|| parties_by_iteration_gu(n, c_th, eta0, cap))
                        .flatten();
                    let ctx = format!("n={n}, c_th={c_th}, eta0={eta0}");
                    let mut row = BoundRow {
                        family: Family::Gu,
                        n: Some(n),
                        s1: None,
                        confidence_threshold: Some(c_th),
                        eta0,
                        delta: None,
                        bound: f64::NAN,
                        admissible: None,
                        iteration,
                        note: None,
                    };
                    record(&mut row, result, cap, ctx, &mut checks);
                    rows.push(row);
                }
            }
        }
    }

    let report = BoundsReport {
        config: cfg.to_value(),
        rows,
    };
    Ok(Outcome {
        csv: render_csv(&report.rows)?,
        json: render_json(&report)?,
        checks,
    })
}

fn record(
    row: &mut BoundRow,
    result: seqmc_core::Result<PartyBound>,
    cap: u64,
    ctx: String,
    checks: &mut Checker,
) {
    match result {
        Ok(b) => {
            row.bound = b.bound;
            row.admissible = b.admissible;
            // Iteration cannot see past its cap.
            let comparable = b.admissible.map_or(true, |a| a < cap);
            if comparable {
                let expected = b.admissible.map_or(Value::Null, Value::from);
                let actual = row.iteration.map_or(Value::Null, Value::from);
                checks.holds(
                    "bound_matches_iteration",
                    Some(ctx.clone()),
                    b.admissible == row.iteration,
                    expected,
                    actual,
                );
            }
            if let Some(a) = b.admissible {
                if b.bound.fract() != 0.0 {
                    checks.close("admissible_is_floor", Some(ctx), b.bound.floor(), a as f64, 0.0);
                }
            }
        }
        Err(e) => row.note = Some(format!("outside domain: {e}")),
    }
}
