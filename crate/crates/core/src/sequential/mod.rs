//! Channels between sequential parties and multi-party runs.
//!
//! Party `j` measures conclusive directions `m_x` with weights `c_x` and
//! hands its post-measurement state to party `j + 1` through
//!
//! ```text
//! K_x = sqrt(c_x) |t_x><m_x|,    K_0 = sum_x sqrt(a_x) |t_x><m_x| (+ W)
//! ```
//!
//! Completeness on span(m) fixes the weighted target Gram matrix to
//! `G_t = Gamma^{-1} - diag(c)` with `Gamma_ij = <m_i|m_j>`, so
//! `a_x = (Gamma^{-1})_xx - c_x`. `W` is an isometry from span(m)^perp to
//! span(t)^perp, present only when there are fewer directions than dimensions.

mod formulas;
mod run;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::linalg::{
    eig_hermitian, ensemble_from_gram, gram_matrix, numerical_rank, ComplexMatrix, C64, ONE, ZERO,
};
use crate::mc::MCSolution;
use crate::quantum::{KrausChannel, PureState};
use crate::tol;

pub use formulas::{
    check_dpi, least_disturbing_params, max_parties_two_state, overlap_growth,
    parties_by_iteration_two_state, DpiReport, LeastDisturbing, OverlapGrowth, PartyBound,
};
pub use run::{run_sequential, PartyRecord, Policy, RunConfig, SequentialRun, Termination};

/// How the next party's states `t_x` are chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPolicy {
    /// Two qubit directions only: `t_x = sqrt((1+s)/2)|0> - (-1)^x sqrt((1-s)/2)|1>`.
    LeastDisturbing,
    /// Vectors recovered from the required Gram matrix.
    Gram,
    /// Caller-supplied states; must be consistent with the required Gram matrix.
    Fixed(Vec<PureState>),
}

/// Compiled inter-party channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelPlan {
    /// Conclusive weights `c_x`.
    pub weights: Vec<f64>,
    /// Inconclusive weights `a_x`.
    pub inconclusive_weights: Vec<f64>,
    pub directions: Vec<PureState>,
    pub targets: Vec<PureState>,
    /// Phases `e^{i alpha_x}` applied to `t_x` inside `K_0` only.
    pub target_phases: Vec<C64>,
    pub channel: KrausChannel,
}

impl ChannelPlan {
    /// `|<t_i|t_j>|`
    pub fn target_overlaps(&self) -> Vec<Vec<f64>> {
        self.targets
            .iter()
            .map(|a| self.targets.iter().map(|b| a.overlap(b)).collect())
            .collect()
    }

    pub fn completeness_defect(&self) -> f64 {
        self.channel.completeness_defect()
    }
}

/// [`build_sequential_channel`] with the directions and weights of `sol`.
pub fn build_from_solution(sol: &MCSolution, targets: &TargetPolicy) -> Result<ChannelPlan> {
    build_sequential_channel(&sol.directions(), &sol.weights(), targets)
}

/// Synthesises the channel induced by measuring `c_x |m_x><m_x|`.
///
/// Errors: `LinearlyDependent` when the directions do not span `n`
/// dimensions, `WeightsTooLarge` when some `a_x < 0`, `InfeasibleGram` when
/// the required target Gram matrix is not PSD, `TargetMismatch` when fixed
/// targets cannot reproduce it.
pub fn build_sequential_channel(
    directions: &[PureState],
    weights: &[f64],
    targets: &TargetPolicy,
) -> Result<ChannelPlan> {
    let n = directions.len();
    if n == 0 {
        return Err(Error::InvalidState("no measurement directions".into()));
    }
    if weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: weights.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(out_of_range("weights", "weights must be finite and nonnegative"));
    }
    let d = directions[0].dim();
    if let Some(bad) = directions.iter().find(|v| v.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: bad.dim(),
        });
    }
    let rank = numerical_rank(directions);
    if rank < n {
        return Err(Error::LinearlyDependent { rank, count: n });
    }

    let gamma = gram_matrix(directions, &vec![1.0; n])?;
    let gamma_inv = eig_hermitian(&gamma)?.map(|x| 1.0 / x);
    let mut a = Vec::with_capacity(n);
    for (x, &c) in weights.iter().enumerate() {
        let value = gamma_inv[(x, x)].re - c;
        if value < -tol::STRUCTURAL {
            return Err(Error::WeightsTooLarge {
                label: x + 1,
                value,
            });
        }
        a.push(value.max(0.0));
    }
    let mut required = gamma_inv.clone();
    for (x, &ax) in a.iter().enumerate() {
        required[(x, x)] = C64::new(ax, 0.0);
    }
    let spec = eig_hermitian(&required)?;
    let scale = required.max_abs().max(1.0);
    if spec.min() < -tol::DECISION * scale {
        return Err(Error::InfeasibleGram {
            min_eigenvalue: spec.min(),
        });
    }

    let raw: Vec<Vec<C64>> = match targets {
        TargetPolicy::Gram => {
            let (vs, _) = ensemble_from_gram(&required)?;
            vs.into_iter()
                .map(|mut v| {
                    v.resize(d, ZERO);
                    v
                })
                .collect()
        }
        TargetPolicy::LeastDisturbing => {
            if n != 2 || d != 2 {
                return Err(out_of_range(
                    "targets",
                    "least-disturbing targets need two qubit directions",
                ));
            }
            let norm = (a[0] * a[1]).sqrt();
            let s = if norm > 0.0 {
                (required[(0, 1)].norm() / norm).min(1.0)
            } else {
                0.0
            };
            let (u, w) = (((1.0 + s) / 2.0).sqrt(), ((1.0 - s) / 2.0).sqrt());
            vec![
                vec![C64::new(u, 0.0), C64::new(w, 0.0)],
                vec![C64::new(u, 0.0), C64::new(-w, 0.0)],
            ]
        }
        TargetPolicy::Fixed(ts) => {
            if ts.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: ts.len(),
                });
            }
            if let Some(bad) = ts.iter().find(|t| t.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: bad.dim(),
                });
            }
            ts.iter().map(|t| t.amplitudes().to_vec()).collect()
        }
    };
    let targets: Vec<PureState> = raw
        .into_iter()
        .map(PureState::normalized)
        .collect::<Result<_>>()?;
    let phases = align_phases(&targets, &a, &required)?;

    let mut k0 = ComplexMatrix::zeros(d);
    for x in 0..n {
        let t: Vec<C64> = targets[x].amplitudes().iter().map(|z| z * phases[x]).collect();
        k0 = &k0 + &ComplexMatrix::outer(&t, directions[x].amplitudes()).scale(a[x].sqrt());
    }
    if n < d {
        k0 = &k0 + &complement_isometry(directions, &targets, d - n)?;
    }
    let mut ops = vec![k0];
    for x in 0..n {
        ops.push(
            ComplexMatrix::outer(targets[x].amplitudes(), directions[x].amplitudes())
                .scale(weights[x].sqrt()),
        );
    }
    let channel = KrausChannel::new(ops)?;
    Ok(ChannelPlan {
        weights: weights.to_vec(),
        inconclusive_weights: a,
        directions: directions.to_vec(),
        targets,
        target_phases: phases,
        channel,
    })
}

/// Phases `e^{i alpha_x}` with `sqrt(a_i a_j) e^{i(alpha_j - alpha_i)} <t_i|t_j> = G_ij`,
/// propagated along nonzero entries from `alpha_1 = 0`.
fn align_phases(targets: &[PureState], a: &[f64], required: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = targets.len();
    let actual = |i: usize, j: usize| targets[i].inner(&targets[j]) * (a[i] * a[j]).sqrt();
    let mut phases: Vec<Option<C64>> = vec![None; n];
    let eps = 1e-12 * required.max_abs().max(1.0);
    for root in 0..n {
        if phases[root].is_some() {
            continue;
        }
        phases[root] = Some(ONE);
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let pi = phases[i].expect("visited");
            for j in 0..n {
                if phases[j].is_some() {
                    continue;
                }
                let want = required[(i, j)];
                let have = actual(i, j);
                if want.norm() > eps && have.norm() > eps {
                    // e^{i alpha_j} = e^{i alpha_i} * want/have, normalised.
                    let ratio = want / have;
                    phases[j] = Some(pi * ratio / ratio.norm());
                    queue.push_back(j);
                }
            }
        }
    }
    let phases: Vec<C64> = phases.into_iter().map(|p| p.unwrap_or(ONE)).collect();
    let mut defect = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let have = actual(i, j) * phases[i].conj() * phases[j];
            defect = defect.max((have - required[(i, j)]).norm());
        }
    }
    if defect > tol::STRUCTURAL * required.max_abs().max(1.0) {
        return Err(Error::TargetMismatch(defect));
    }
    Ok(phases)
}

/// Orthonormal basis of the orthogonal complement of `vectors`, smallest
/// eigenvalues of `sum |v><v|` first.
fn complement_basis<V: AsRef<[C64]>>(vectors: &[V], count: usize, d: usize) -> Result<Vec<Vec<C64>>> {
    let s: ComplexMatrix = vectors
        .iter()
        .map(|v| ComplexMatrix::projector(v.as_ref()))
        .fold(ComplexMatrix::zeros(d), |acc, p| &acc + &p);
    let spec = eig_hermitian(&s)?;
    Ok(spec.vectors.into_iter().rev().take(count).collect())
}

fn complement_isometry(
    directions: &[PureState],
    targets: &[PureState],
    count: usize,
) -> Result<ComplexMatrix> {
    let d = directions[0].dim();
    let from = complement_basis(directions, count, d)?;
    let to = complement_basis(targets, count, d)?;
    Ok(from
        .iter()
        .zip(&to)
        .map(|(v, u)| ComplexMatrix::outer(u, v))
        .fold(ComplexMatrix::zeros(d), |acc, m| &acc + &m))
}
