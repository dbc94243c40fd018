//! Typed experiment configuration.
//!
//! Documents are validated against the bundled schema first, so every
//! violation carries a JSON pointer; serde then fills defaults. Serializing a
//! parsed config yields its normal form, with every default written out.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::schema::{experiment_schema, validate, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    TwoStateSweep,
    GuSweep,
    SequentialRun,
    Bounds,
    Verify,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::TwoStateSweep => "two_state_sweep",
            Kind::GuSweep => "gu_sweep",
            Kind::SequentialRun => "sequential_run",
            Kind::Bounds => "bounds",
            Kind::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
    #[serde(default)]
    pub format: Format,
}

/// Explicit values or an inclusive evenly spaced range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { start, stop, count } => match *count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            *stop
                        } else {
                            start + (stop - start) * i as f64 / (n - 1) as f64
                        }
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepPolicyKind {
    /// Equal weight `c = value * c_max`.
    ConclusiveFraction,
    /// Inconclusive rate `eta0 = value`.
    Eta0,
    /// Guessing probability `G = value`.
    Guessing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPolicy {
    pub kind: SweepPolicyKind,
    pub value: f64,
}

impl Default for SweepPolicy {
    fn default() -> Self {
        Self {
            kind: SweepPolicyKind::ConclusiveFraction,
            value: 0.5,
        }
    }
}

fn default_brute_force_grid() -> usize {
    400
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStateParams {
    pub p: Grid,
    pub theta: Grid,
    #[serde(default)]
    pub policy: SweepPolicy,
    #[serde(default = "default_brute_force_grid")]
    pub brute_force_grid: usize,
}

fn default_gu_parties() -> usize {
    6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuParams {
    pub n: Vec<usize>,
    pub eta0: Vec<f64>,
    #[serde(default = "default_gu_parties")]
    pub parties: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleSpec {
    TwoState { p: f64, theta: f64 },
    Gu { n: usize },
    Custom { priors: Vec<f64>, states: Vec<Value> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Eta0,
    Guessing,
    FixedWeight,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunPolicy {
    pub kind: PolicyKind,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Targets {
    #[default]
    LeastDisturbing,
    Gram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequentialParams {
    pub ensemble: EnsembleSpec,
    pub parties: usize,
    pub policy: RunPolicy,
    #[serde(default)]
    pub targets: Targets,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStateBounds {
    pub s1: Grid,
    pub eta0: Grid,
    pub delta: Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuBounds {
    pub n: Vec<usize>,
    pub confidence_threshold: Grid,
    pub eta0: Grid,
}

fn default_iteration_cap() -> u64 {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_state: Option<TwoStateBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gu: Option<GuBounds>,
    #[serde(default = "default_iteration_cap")]
    pub iteration_cap: u64,
}

fn default_closed_form_grid() -> usize {
    20
}
fn default_certify_draws() -> usize {
    500
}
fn default_dpi_draws() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    #[serde(default = "default_closed_form_grid")]
    pub closed_form_grid: usize,
    #[serde(default = "default_brute_force_grid")]
    pub brute_force_grid: usize,
    #[serde(default = "default_certify_draws")]
    pub certify_draws: usize,
    #[serde(default = "default_dpi_draws")]
    pub dpi_draws: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    TwoState(TwoStateParams),
    Gu(GuParams),
    Sequential(SequentialParams),
    Bounds(BoundsParams),
    Verify(VerifyParams),
}

fn default_delta() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub trials: u64,
    pub delta: f64,
    pub output: OutputConfig,
    pub params: Params,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Kind,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    trials: u64,
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default)]
    output: OutputConfig,
    params: Value,
}

/// Settings that override the document before validation.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub format: Option<Format>,
}

impl Overrides {
    fn apply(&self, doc: &mut Value) {
        let Some(obj) = doc.as_object_mut() else {
            return;
        };
        if let Some(seed) = self.seed {
            obj.insert("seed".into(), seed.into());
        }
        if let Some(trials) = self.trials {
            obj.insert("trials".into(), trials.into());
        }
        if let Some(format) = self.format {
            let output = obj
                .entry("output")
                .or_insert_with(|| Value::Object(Default::default()));
            if let Some(o) = output.as_object_mut() {
                o.insert("format".into(), format.extension().into());
            }
        }
    }
}

impl ExperimentConfig {
    /// Validates and parses a JSON document.
    pub fn from_value(mut doc: Value, overrides: &Overrides) -> Result<Self, CliError> {
        overrides.apply(&mut doc);
        let mut violations = validate(&experiment_schema(), &doc);
        if !violations.is_empty() {
            return Err(CliError::Schema(violations));
        }
        let raw: RawConfig = serde_json::from_value(doc)
            .map_err(|e| CliError::Schema(vec![Violation::new("", e.to_string())]))?;
        let params = parse_params(raw.kind, raw.params)?;
        if let Some(stem) = &raw.output.stem {
            if !stem
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
                || stem.starts_with('.')
            {
                violations.push(Violation::new(
                    "/output/stem",
                    "stem may only contain letters, digits, '_', '-' and '.', and may not start with '.'",
                ));
            }
        }
        semantic_checks(&params, &mut violations);
        if !violations.is_empty() {
            return Err(CliError::Schema(violations));
        }
        Ok(Self {
            kind: raw.kind,
            seed: raw.seed,
            trials: raw.trials,
            delta: raw.delta,
            output: raw.output,
            params,
        })
    }

    pub fn from_json_str(text: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let doc: Value = serde_json::from_str(text).map_err(CliError::Json)?;
        Self::from_value(doc, overrides)
    }

    pub fn from_path(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json_str(&text, overrides)
    }

    /// Normal form with all defaults written out.
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn stem(&self) -> &str {
        self.output.stem.as_deref().unwrap_or(self.kind.as_str())
    }

    /// Seed for stochastic steps; presence is enforced by validation.
    pub fn seed_or_zero(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

fn parse_params(kind: Kind, params: Value) -> Result<Params, CliError> {
    fn typed<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, CliError> {
        serde_json::from_value(v)
            .map_err(|e| CliError::Schema(vec![Violation::new("/params", e.to_string())]))
    }
    Ok(match kind {
        Kind::TwoStateSweep => Params::TwoState(typed(params)?),
        Kind::GuSweep => Params::Gu(typed(params)?),
        Kind::SequentialRun => Params::Sequential(typed(params)?),
        Kind::Bounds => Params::Bounds(typed(params)?),
        Kind::Verify => Params::Verify(typed(params)?),
    })
}

/// Constraints the schema cannot express.
fn semantic_checks(params: &Params, out: &mut Vec<Violation>) {
    match params {
        Params::Bounds(b) if b.two_state.is_none() && b.gu.is_none() => {
            out.push(Violation::new(
                "/params",
                "at least one of `two_state` or `gu` is required",
            ));
        }
        Params::Sequential(s) => {
            if let EnsembleSpec::Custom { priors, states } = &s.ensemble {
                if priors.len() != states.len() {
                    out.push(Violation::new(
                        "/params/ensemble/priors",
                        format!("{} priors for {} states", priors.len(), states.len()),
                    ));
                }
            }
        }
        _ => {}
    }
}
