//! One module per experiment kind.

pub mod bounds;
pub mod gu;
pub mod sequential;
pub mod two_state;
pub mod verify;

use seqmc_core::quantum::PartyStats;

use crate::checks::Checker;
use crate::config::{ExperimentConfig, Params};
use crate::error::CliError;

/// Monte Carlo estimates must lie within this many binomial standard errors.
pub const MC_SIGMA: f64 = 4.0;

/// Rendered data in both formats plus the verification block.
#[derive(Debug)]
pub struct Outcome {
    pub csv: Vec<u8>,
    pub json: Vec<u8>,
    pub checks: Checker,
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match &cfg.params {
        Params::TwoState(p) => two_state::run(cfg, p),
        Params::Gu(p) => gu::run(cfg, p),
        Params::Sequential(p) => sequential::run(cfg, p),
        Params::Bounds(p) => bounds::run(cfg, p),
        Params::Verify(p) => verify::run(cfg, p),
    }
}

/// Seed for grid point `index`, so points sample independently of order.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Empirical confidence from `count` conclusive outcomes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub count: u64,
}

impl Estimate {
    /// Binomial standard error at the empirical value.
    pub fn std_error(&self) -> f64 {
        (self.value * (1.0 - self.value) / self.count as f64).sqrt()
    }

    /// Binomial standard error if `exact` were the true confidence.
    pub fn null_std_error(&self, exact: f64) -> f64 {
        let c = exact.clamp(0.0, 1.0);
        (c * (1.0 - c) / self.count as f64).sqrt()
    }
}

/// Estimate for conclusive outcome `x` (1-based).
pub fn outcome_estimate(stats: &PartyStats, x: usize) -> Option<Estimate> {
    stats.confidence(x).map(|value| Estimate {
        value,
        count: stats.outcome_count(x),
    })
}

/// Confidence pooled over outcomes.
///
/// Meaningful when every outcome has the same exact confidence.
pub fn pooled_confidence(stats: &PartyStats) -> Option<Estimate> {
    let labels = stats.joint.len();
    let (hits, count) = (1..=labels).fold((0u64, 0u64), |(h, t), x| {
        (h + stats.joint[x - 1][x], t + stats.outcome_count(x))
    });
    (count > 0).then(|| Estimate {
        value: hits as f64 / count as f64,
        count,
    })
}

/// Records an empirical-versus-exact comparison at [`MC_SIGMA`] standard
/// errors, taken under the exact value.
pub fn check_sampled(
    checks: &mut Checker,
    name: &str,
    ctx: Option<String>,
    exact: f64,
    estimate: Option<Estimate>,
) {
    match estimate {
        Some(e) => {
            checks.close(name, ctx, exact, e.value, MC_SIGMA * e.null_std_error(exact) + 1e-12);
        }
        None => {
            checks.holds(name, ctx, false, "conclusive outcomes observed", "none");
        }
    }
}
