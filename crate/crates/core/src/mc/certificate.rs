use serde::{Deserialize, Serialize};

use super::MCSolution;
use crate::error::{Error, Result};
use crate::linalg::eig_hermitian;
use crate::quantum::Ensemble;
use crate::tol;

/// Optimality conditions for one conclusive outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCertificate {
    pub label: usize,
    /// Smallest eigenvalue of `C_x rho - q_x rho_x`.
    pub min_eigenvalue: f64,
    /// `|tr[(C_x rho - q_x rho_x) M_x]|`
    pub slackness: f64,
    /// Max-abs entry of `C_x rho - q_x rho_x - r_x sigma_x`, when `sigma_x` is known.
    pub lagrangian_residual: Option<f64>,
    /// `tr[M_x sigma_x]`, when `sigma_x` is known.
    pub complementary_overlap: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityCertificate {
    pub outcomes: Vec<OutcomeCertificate>,
    pub pass: bool,
}

impl OptimalityCertificate {
    pub fn worst_min_eigenvalue(&self) -> f64 {
        self.outcomes.iter().map(|o| o.min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    pub fn worst_slackness(&self) -> f64 {
        self.outcomes.iter().map(|o| o.slackness).fold(0.0, f64::max)
    }

    pub fn worst_lagrangian_residual(&self) -> f64 {
        self.outcomes
            .iter()
            .filter_map(|o| o.lagrangian_residual)
            .fold(0.0, f64::max)
    }
}

/// Evaluates `C_x rho - q_x rho_x >= 0` and `tr[(C_x rho - q_x rho_x) M_x] = 0`
/// at `tol::DECISION`, plus the Lagrangian identity when `sigma_x` is present.
pub fn certify_optimality(ens: &Ensemble, sol: &MCSolution) -> Result<OptimalityCertificate> {
    if sol.dim() != ens.dim() {
        return Err(Error::DimensionMismatch {
            expected: ens.dim(),
            actual: sol.dim(),
        });
    }
    if sol.len() != ens.len() {
        return Err(Error::DimensionMismatch {
            expected: ens.len(),
            actual: sol.len(),
        });
    }
    let rho = ens.average();
    let mut outcomes = Vec::with_capacity(sol.len());
    for o in &sol.outcomes {
        let a = &rho.matrix().scale(o.confidence) - &ens.weighted_state(o.label);
        let min_eigenvalue = eig_hermitian(&a)?.min();
        let slackness = (o.weight * a.expectation(o.direction.amplitudes()).re).abs();
        let (lagrangian_residual, complementary_overlap) = match &o.complementary {
            Some(sigma) => {
                let rest = &a - &sigma.matrix().scale(o.lagrange_weight);
                let overlap = o.weight * sigma.matrix().expectation(o.direction.amplitudes()).re;
                (Some(rest.max_abs()), Some(overlap))
            }
            None => (None, None),
        };
        let pass = min_eigenvalue >= -tol::DECISION
            && slackness <= tol::DECISION
            && lagrangian_residual.is_none_or(|r| r <= tol::DECISION)
            && complementary_overlap.is_none_or(|r| r.abs() <= tol::DECISION);
        outcomes.push(OutcomeCertificate {
            label: o.label,
            min_eigenvalue,
            slackness,
            lagrangian_residual,
            complementary_overlap,
            pass,
        });
    }
    let pass = outcomes.iter().all(|o| o.pass);
    Ok(OptimalityCertificate { outcomes, pass })
}
