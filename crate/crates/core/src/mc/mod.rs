//! Maximum-confidence measurements.
//!
//! For outcome `x` the confidence `q_x tr[rho_x M]/tr[rho M]` is a Rayleigh
//! quotient, so its maximum over rank-one `M` is the top eigenvalue of
//! `q_x rho^{-1/2} rho_x rho^{-1/2}` on the support of the average `rho`.

mod certificate;
mod closed_form;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::linalg::{eig_hermitian, inner, ComplexMatrix, C64, ZERO};
use crate::quantum::{DensityOperator, Ensemble, Povm, PureState, RankOneView};
use crate::tol;

pub use certificate::{certify_optimality, OptimalityCertificate, OutcomeCertificate};
pub use closed_form::{
    complementary_states, two_state_closed_form, two_state_confidence, two_state_directions,
};
pub use oracle::brute_force_confidence_qubit;

/// Optimal conclusive direction for one outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceElement {
    pub confidence: f64,
    pub direction: PureState,
    /// Top generalized eigenvalue is not simple.
    pub degenerate: bool,
}

/// One conclusive outcome `M_x = weight |direction><direction|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSolution {
    pub label: usize,
    pub confidence: f64,
    pub direction: PureState,
    pub weight: f64,
    /// `sigma_x` with `C_x rho = q_x rho_x + r_x sigma_x`; absent when `r_x = 0`.
    pub complementary: Option<DensityOperator>,
    pub lagrange_weight: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCSolution {
    pub outcomes: Vec<OutcomeSolution>,
    /// `M_0 = I - sum_x M_x`
    pub inconclusive: ComplexMatrix,
}

/// Guessing probability with the per-outcome rates it is built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Guessing {
    /// `sum_x C_x eta_x`
    pub g: f64,
    /// `eta_x = tr[rho M_x]` for `x = 1..=n`.
    pub eta: Vec<f64>,
    pub eta0: f64,
}

impl MCSolution {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inconclusive.dim()
    }

    pub fn confidences(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.confidence).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.weight).collect()
    }

    pub fn directions(&self) -> Vec<PureState> {
        self.outcomes.iter().map(|o| o.direction.clone()).collect()
    }

    /// `|<m_i|m_j>|` over conclusive directions.
    pub fn overlap_matrix(&self) -> Vec<Vec<f64>> {
        self.outcomes
            .iter()
            .map(|a| self.outcomes.iter().map(|b| a.direction.overlap(&b.direction)).collect())
            .collect()
    }

    /// Largest off-diagonal entry of [`Self::overlap_matrix`].
    pub fn max_overlap(&self) -> f64 {
        let m = self.overlap_matrix();
        let mut best = 0.0_f64;
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    best = best.max(v);
                }
            }
        }
        best
    }

    /// Largest equal weight `c` keeping `M_0` PSD: `1/lambda_max(sum_x |m_x><m_x|)`.
    pub fn max_equal_weight(&self) -> Result<f64> {
        max_equal_weight(&self.directions())
    }

    /// Same directions with new weights; `M_0` must stay PSD.
    pub fn with_weights(&self, weights: &[f64]) -> Result<MCSolution> {
        let inconclusive = inconclusive_element(&self.directions(), weights)?;
        let mut out = self.clone();
        for (o, &w) in out.outcomes.iter_mut().zip(weights) {
            o.weight = w;
        }
        out.inconclusive = inconclusive;
        Ok(out)
    }

    /// The measurement with outcome `0` first.
    pub fn povm(&self) -> Povm {
        let mut elements = vec![self.inconclusive.clone()];
        elements.extend(
            self.outcomes
                .iter()
                .map(|o| o.direction.projector().scale(o.weight)),
        );
        let views = self
            .outcomes
            .iter()
            .map(|o| RankOneView {
                weight: o.weight,
                direction: o.direction.clone(),
            })
            .collect();
        Povm::new_unchecked(elements).with_rank_one_views(views)
    }
}

/// `1/lambda_max(sum_x |m_x><m_x|)` for unit directions `m_x`.
pub fn max_equal_weight(directions: &[PureState]) -> Result<f64> {
    let s: ComplexMatrix = directions.iter().map(|d| d.projector()).sum();
    Ok(1.0 / eig_hermitian(&s)?.max())
}

fn inconclusive_element(directions: &[PureState], weights: &[f64]) -> Result<ComplexMatrix> {
    if weights.len() != directions.len() {
        return Err(Error::DimensionMismatch {
            expected: directions.len(),
            actual: weights.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(out_of_range("weights", "weights must be finite and nonnegative"));
    }
    let d = directions[0].dim();
    let mut m0 = ComplexMatrix::identity(d);
    for (dir, &w) in directions.iter().zip(weights) {
        m0 = &m0 - &dir.projector().scale(w);
    }
    let min = eig_hermitian(&m0)?.min();
    if min < -tol::STRUCTURAL {
        return Err(Error::InfeasibleWeights {
            min_eigenvalue: min,
        });
    }
    Ok(m0)
}

/// Validated POVM `{I - sum c_x |m_x><m_x|, c_1 |m_1><m_1|, ...}`.
pub fn assemble_povm(sol: &MCSolution, weights: &[f64]) -> Result<Povm> {
    Ok(sol.with_weights(weights)?.povm())
}

/// Maximum of the confidence functional for conclusive label `x` (1-based).
///
/// Eigenvalues of `rho` at or below `tol::SUPPORT` are treated as outside
/// its support. If `rho_x` has more than `tol::DECISION` of its trace there
/// the problem is rejected instead of truncated.
pub fn max_confidence_element(ens: &Ensemble, x: usize) -> Result<ConfidenceElement> {
    if x == 0 || x > ens.len() {
        return Err(out_of_range("x", format!("label {x} not in 1..={}", ens.len())));
    }
    let avg = ens.average();
    let spec = eig_hermitian(avg.matrix())?;
    let support: Vec<usize> = (0..spec.dim())
        .filter(|&k| spec.values[k] > tol::SUPPORT)
        .collect();
    let rho_x = ens.states()[x - 1].matrix();
    let inside: f64 = support
        .iter()
        .map(|&k| rho_x.expectation(&spec.vectors[k]).re)
        .sum();
    let leakage = 1.0 - inside;
    if leakage > tol::DECISION {
        return Err(Error::SingularAverage { label: x, leakage });
    }

    let k = support.len();
    let q = ens.priors()[x - 1];
    let scaled: Vec<Vec<C64>> = support
        .iter()
        .map(|&i| {
            let r = 1.0 / spec.values[i].sqrt();
            spec.vectors[i].iter().map(|z| z * r).collect()
        })
        .collect();
    let reduced = ComplexMatrix::from_fn(k, |a, b| {
        inner(&scaled[a], &rho_x.apply(&scaled[b])) * q
    });
    let top = eig_hermitian(&reduced)?;
    let confidence = top.max();
    let degenerate = k > 1 && confidence - top.values[1] <= tol::DECISION * confidence.abs().max(1.0);

    let d = ens.dim();
    let mut v = vec![ZERO; d];
    for (a, coeff) in top.vectors[0].iter().enumerate() {
        for (vi, si) in v.iter_mut().zip(&scaled[a]) {
            *vi += si * coeff;
        }
    }
    Ok(ConfidenceElement {
        confidence,
        direction: PureState::normalized(v)?,
        degenerate,
    })
}

/// `r_x = ||C_x rho - q_x rho_x||_1` and `sigma_x` its normalised remainder.
pub(crate) fn lagrange_pair(
    ens: &Ensemble,
    x: usize,
    confidence: f64,
) -> Result<(f64, Option<DensityOperator>)> {
    let a = &ens.average().matrix().scale(confidence) - &ens.weighted_state(x);
    let r = a.trace_norm()?;
    if r <= tol::DECISION {
        return Ok((r, None));
    }
    let sigma = DensityOperator::new(a.hermitian_part().scale(1.0 / r)).ok();
    Ok((r, sigma))
}

/// MC solution for every outcome at the largest feasible equal weight.
pub fn solve_mc(ens: &Ensemble) -> Result<MCSolution> {
    let mut outcomes = Vec::with_capacity(ens.len());
    for x in 1..=ens.len() {
        let el = max_confidence_element(ens, x)?;
        let (r, sigma) = lagrange_pair(ens, x, el.confidence)?;
        outcomes.push(OutcomeSolution {
            label: x,
            confidence: el.confidence,
            direction: el.direction,
            weight: 0.0,
            complementary: sigma,
            lagrange_weight: r,
            degenerate: el.degenerate,
        });
    }
    let sol = MCSolution {
        inconclusive: ComplexMatrix::identity(ens.dim()),
        outcomes,
    };
    let c = sol.max_equal_weight()?;
    sol.with_weights(&vec![c; ens.len()])
}

/// Confidence-weighted conclusive rate and the outcome rates under `sol`.
pub fn guessing_probability(ens: &Ensemble, sol: &MCSolution) -> Guessing {
    let rho = ens.average();
    let eta: Vec<f64> = sol
        .outcomes
        .iter()
        .map(|o| o.weight * rho.matrix().expectation(o.direction.amplitudes()).re)
        .collect();
    let g = sol
        .outcomes
        .iter()
        .zip(&eta)
        .map(|(o, e)| o.confidence * e)
        .sum();
    Guessing {
        g,
        eta,
        eta0: rho.expectation(&sol.inconclusive),
    }
}
