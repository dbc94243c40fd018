//! Closed forms for the equal-prior two-state family.

use std::f64::consts::PI;

use super::{MCSolution, OutcomeSolution};
use crate::error::{out_of_range, Result};
use crate::linalg::ComplexMatrix;
use crate::quantum::PureState;

fn check(p: f64, theta: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(out_of_range("p", format!("{p} not in (0, 1]")));
    }
    if !(theta > 0.0 && theta < PI) {
        return Err(out_of_range("theta", format!("{theta} not in (0, pi)")));
    }
    Ok(())
}

/// `C = (1 + p sin(theta)/sqrt(1 - p^2 cos^2(theta)))/2` for both outcomes.
pub fn two_state_confidence(p: f64, theta: f64) -> Result<f64> {
    check(p, theta)?;
    let pc = p * theta.cos();
    Ok(0.5 * (1.0 + p * theta.sin() / (1.0 - pc * pc).sqrt()))
}

/// `[phi_1, phi_2]` with `phi_x = sqrt((1+pc)/2)|0> - (-1)^x sqrt((1-pc)/2)|1>`,
/// `c = cos(theta)`. Each `rho_x` is `C|phi_x><phi_x| + (1-C)|phi_y><phi_y|`.
pub fn complementary_states(p: f64, theta: f64) -> Result<[PureState; 2]> {
    check(p, theta)?;
    let pc = p * theta.cos();
    let (a, b) = (((1.0 + pc) / 2.0).sqrt(), ((1.0 - pc) / 2.0).sqrt());
    Ok([PureState::qubit(a, b)?, PureState::qubit(a, -b)?])
}

/// MC directions `[phi_2^perp, phi_1^perp]`; their overlap is `p|cos(theta)|`.
pub fn two_state_directions(p: f64, theta: f64) -> Result<[PureState; 2]> {
    let [phi1, phi2] = complementary_states(p, theta)?;
    Ok([phi2.orthogonal_qubit()?, phi1.orthogonal_qubit()?])
}

/// Closed-form MC solution at the largest feasible equal weight
/// `1/(1 + p|cos(theta)|)`. Outcome `x` has `sigma_x = |phi_y><phi_y|`
/// (`y != x`) and `r_x = C - 1/2`.
pub fn two_state_closed_form(p: f64, theta: f64) -> Result<MCSolution> {
    let c = two_state_confidence(p, theta)?;
    let phis = complementary_states(p, theta)?;
    let dirs = two_state_directions(p, theta)?;
    let weight = 1.0 / (1.0 + p * theta.cos().abs());
    let outcomes = (0..2)
        .map(|i| OutcomeSolution {
            label: i + 1,
            confidence: c,
            direction: dirs[i].clone(),
            weight,
            complementary: Some(phis[1 - i].density()),
            lagrange_weight: c - 0.5,
            degenerate: false,
        })
        .collect();
    let sol = MCSolution {
        outcomes,
        inconclusive: ComplexMatrix::identity(2),
    };
    sol.with_weights(&[weight, weight])
}
