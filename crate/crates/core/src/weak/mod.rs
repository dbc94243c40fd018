//! Weak measurements for linearly dependent directions and the
//! geometric-uniform (GU) decay laws.
//!
//! The strength is `eps = 1 - eta0`; GU formulas are parameterised by `eta0`.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::linalg::{psd_sqrt, ComplexMatrix};
use crate::mc::solve_mc;
use crate::quantum::{gu_state, propagate_ensemble, DensityOperator, Ensemble, KrausChannel, Povm};
use crate::sequential::PartyBound;
use crate::tol;

/// `N_x = eps M_x`, `N_0 = (1 - eps) I + eps M_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakenedPovm {
    pub strength: f64,
    pub base: Povm,
    pub povm: Povm,
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(out_of_range(name, format!("{v} not in [0, 1]")));
    }
    Ok(())
}

pub fn weaken_povm(base: &Povm, eps: f64) -> Result<WeakenedPovm> {
    check_unit("eps", eps)?;
    if base.outcomes() == 0 {
        return Err(Error::InvalidState("empty POVM".into()));
    }
    let d = base.dim();
    let mut elements = Vec::with_capacity(base.outcomes());
    elements.push(&ComplexMatrix::identity(d).scale(1.0 - eps) + &base.element(0).scale(eps));
    elements.extend(base.elements()[1..].iter().map(|m| m.scale(eps)));
    let mut povm = Povm::new_unchecked(elements);
    if let Some(views) = base.rank_one_views() {
        let mut views = views.to_vec();
        views.iter_mut().for_each(|v| v.weight *= eps);
        povm = povm.with_rank_one_views(views);
    }
    Ok(WeakenedPovm {
        strength: eps,
        base: base.clone(),
        povm,
    })
}

/// Gauge `V_i` in `K_i = V_i sqrt(N_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakGauge {
    Identity,
    /// One unitary per outcome, outcome `0` first.
    Unitaries(Vec<ComplexMatrix>),
}

pub fn weak_channel(weak: &WeakenedPovm, gauge: &WeakGauge) -> Result<KrausChannel> {
    let roots = weak
        .povm
        .elements()
        .iter()
        .map(psd_sqrt)
        .collect::<Result<Vec<_>>>()?;
    let ops = match gauge {
        WeakGauge::Identity => roots,
        WeakGauge::Unitaries(us) => {
            if us.len() != roots.len() {
                return Err(Error::DimensionMismatch {
                    expected: roots.len(),
                    actual: us.len(),
                });
            }
            if us.iter().any(|u| !u.is_unitary(crate::tol::STRUCTURAL)) {
                return Err(Error::InvalidState("gauge operator is not unitary".into()));
            }
            us.iter().zip(&roots).map(|(u, r)| u * r).collect()
        }
    };
    KrausChannel::new(ops)
}

fn check_gu(n: usize) -> Result<()> {
    if n < 3 {
        return Err(out_of_range("n", format!("GU decay laws need n >= 3, got {n}")));
    }
    Ok(())
}

/// `{sqrt(eta0) I, sqrt(2(1 - eta0)/n) |psi_x><psi_x|}`.
pub fn gu_weak_channel(n: usize, eta0: f64) -> Result<KrausChannel> {
    check_gu(n)?;
    check_unit("eta0", eta0)?;
    let mut ops = vec![ComplexMatrix::identity(2).scale(eta0.sqrt())];
    let r = (2.0 * (1.0 - eta0) / n as f64).sqrt();
    for k in 1..=n {
        ops.push(gu_state(n, k)?.projector().scale(r));
    }
    KrausChannel::new(ops)
}

/// `p_+ |psi_x><psi_x| + p_- |psi_x^perp><psi_x^perp|`, `p_pm = (1 +- (1+eta0)/2)/2`.
pub fn gu_post_state(n: usize, eta0: f64, x: usize) -> Result<DensityOperator> {
    check_gu(n)?;
    check_unit("eta0", eta0)?;
    if x == 0 || x > n {
        return Err(out_of_range("x", format!("label {x} not in 1..={n}")));
    }
    let psi = gu_state(n, x)?;
    let perp = psi.orthogonal_qubit()?;
    let l = (1.0 + eta0) / 2.0;
    DensityOperator::new(
        &psi.projector().scale(0.5 * (1.0 + l)) + &perp.projector().scale(0.5 * (1.0 - l)),
    )
}

/// `prod_k (1 + eta0_k)/2`
pub fn gu_bloch_length(eta0s: &[f64]) -> Result<f64> {
    eta0s.iter().try_fold(1.0, |acc, &e| {
        check_unit("eta0", e)?;
        Ok(acc * (1.0 + e) / 2.0)
    })
}

/// Confidence of party `j` (1-based) after parties `1..j` used `eta0s[..j-1]`:
/// `(1 + prod_{k<j} (1 + eta0_k)/2)/n`.
pub fn gu_sequential_confidence(n: usize, eta0s: &[f64], j: usize) -> Result<f64> {
    check_gu(n)?;
    if j == 0 || j - 1 > eta0s.len() {
        return Err(out_of_range("j", format!("party {j} needs {} rates", j.saturating_sub(1))));
    }
    let l = gu_bloch_length(&eta0s[..j - 1])?;
    Ok(0.5 * (1.0 + l) * 2.0 / n as f64)
}

/// `1 + log(n C_th - 1)/log((1 + eta0)/2)`: parties `j` with `C^(j) > C_th`
/// satisfy `j` strictly below it.
pub fn max_parties_gu(n: usize, c_th: f64, eta0: f64) -> Result<PartyBound> {
    check_gu(n)?;
    if !(n as f64 * c_th > 1.0) {
        return Err(out_of_range("c_th", format!("n C_th = {} must exceed 1", n as f64 * c_th)));
    }
    check_unit("eta0", eta0)?;
    let ratio = n as f64 * c_th - 1.0;
    if eta0 == 1.0 {
        // Confidence stays at 2/n: every party counts or none does.
        let bound = if (ratio - 1.0).abs() <= tol::BOUND_TIE {
            1.0
        } else if ratio < 1.0 {
            f64::INFINITY
        } else {
            0.0
        };
        return Ok(PartyBound::from_bound(bound));
    }
    let bound = 1.0 + ratio.ln() / ((1.0 + eta0) / 2.0).ln();
    Ok(PartyBound::from_bound(bound.max(0.0)))
}

/// Number of parties `j = 1, 2, ...` with `C^(j) > c_th` under a constant
/// rate, up to `cap`. `None` when the cap is hit.
pub fn parties_by_iteration_gu(n: usize, c_th: f64, eta0: f64, cap: u64) -> Option<u64> {
    let mut l = 1.0;
    for count in 0..=cap {
        let c = 0.5 * (1.0 + l) * 2.0 / n as f64;
        if c <= c_th + tol::THRESHOLD_TIE {
            return Some(count);
        }
        l *= (1.0 + eta0) / 2.0;
    }
    None
}

/// Exact next-party confidence after an `eps`-weak measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceDrop {
    pub eps: f64,
    /// Smallest MC confidence of the input ensemble.
    pub c1: f64,
    /// Smallest MC confidence after the weak channel at `eps`.
    pub c2: f64,
    /// Least-squares slope through the origin of `(C1 - C2)/C1` against `eps`.
    pub linear_coefficient: f64,
    /// Slope of the first-order law `C2 = (1 - eps) C1`.
    pub first_order_law_coefficient: f64,
}

const DROP_MESH: usize = 8;

fn next_confidence(povm: &Povm, ens: &Ensemble, eps: f64) -> Result<f64> {
    let channel = weak_channel(&weaken_povm(povm, eps)?, &WeakGauge::Identity)?;
    let next = propagate_ensemble(&channel, ens)?;
    Ok(min_confidence(&next)?)
}

fn min_confidence(ens: &Ensemble) -> Result<f64> {
    Ok(solve_mc(ens)?
        .confidences()
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Confidence drop of the next party, exact at `eps` and fitted on the
/// mesh `eps k/8`, `k = 1..=8`.
pub fn confidence_drop_small_eps(povm: &Povm, ens: &Ensemble, eps: f64) -> Result<ConfidenceDrop> {
    check_unit("eps", eps)?;
    let c1 = min_confidence(ens)?;
    let c2 = next_confidence(povm, ens, eps)?;
    let (mut num, mut den) = (0.0, 0.0);
    if eps > 0.0 {
        for k in 1..=DROP_MESH {
            let e = eps * k as f64 / DROP_MESH as f64;
            let y = (c1 - next_confidence(povm, ens, e)?) / c1;
            num += e * y;
            den += e * e;
        }
    }
    Ok(ConfidenceDrop {
        eps,
        c1,
        c2,
        linear_coefficient: if den > 0.0 { num / den } else { 0.0 },
        first_order_law_coefficient: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{apply_channel, bloch_from_density, gu_ensemble, validate_povm};

    fn trine_povm() -> Povm {
        solve_mc(&gu_ensemble(3).unwrap()).unwrap().povm()
    }

    #[test]
    fn full_and_zero_strength() {
        let base = trine_povm();
        let w1 = weaken_povm(&base, 1.0).unwrap();
        for (a, b) in w1.povm.elements().iter().zip(base.elements()) {
            assert!(a.max_abs_diff(b) < 1e-15);
        }
        let w0 = weaken_povm(&base, 0.0).unwrap();
        assert!(w0.povm.element(0).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        let ch = weak_channel(&w0, &WeakGauge::Identity).unwrap();
        assert!(ch.operators()[0].max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        assert!(weaken_povm(&base, 1.5).is_err());
    }

    #[test]
    fn weakened_trine_keeps_confidence() {
        let ens = gu_ensemble(3).unwrap();
        let w = weaken_povm(&trine_povm(), 0.5).unwrap();
        assert!(validate_povm(&w.povm).pass);
        let rho = ens.average();
        for x in 1..=3 {
            let n = w.povm.element(x);
            let c = ens.priors()[x - 1] * ens.states()[x - 1].expectation(n) / rho.expectation(n);
            assert!((c - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gu_channel_matches_square_root_construction() {
        for n in 3..=6 {
            let base = solve_mc(&gu_ensemble(n).unwrap()).unwrap().povm();
            let eta0 = 0.35;
            let generic = weak_channel(&weaken_povm(&base, 1.0 - eta0).unwrap(), &WeakGauge::Identity)
                .unwrap();
            let explicit = gu_weak_channel(n, eta0).unwrap();
            for (a, b) in generic.operators().iter().zip(explicit.operators()) {
                assert!(a.max_abs_diff(b) < 1e-12);
            }
        }
    }

    #[test]
    fn post_state_matches_channel() {
        for &(n, eta0) in &[(4, 0.5), (3, 0.0), (5, 1.0)] {
            let ch = gu_weak_channel(n, eta0).unwrap();
            for x in 1..=n {
                let out = apply_channel(&ch, &gu_state(n, x).unwrap().density()).unwrap();
                let want = gu_post_state(n, eta0, x).unwrap();
                assert!(out.matrix().max_abs_diff(want.matrix()) < 1e-10);
            }
        }
        let v = bloch_from_density(&gu_post_state(3, 0.0, 1).unwrap()).unwrap();
        assert!(((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn decay_formula_values() {
        assert_eq!(gu_bloch_length(&[]).unwrap(), 1.0);
        assert_eq!(gu_bloch_length(&[0.0]).unwrap(), 0.5);
        assert!((gu_bloch_length(&[0.5, 0.5]).unwrap() - 9.0 / 16.0).abs() < 1e-15);
        assert!((gu_sequential_confidence(3, &[0.0], 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((gu_sequential_confidence(3, &[0.5], 2).unwrap() - 7.0 / 12.0).abs() < 1e-15);
        assert!((gu_sequential_confidence(5, &[1.0; 4], 5).unwrap() - 0.4).abs() < 1e-15);
        assert!(gu_sequential_confidence(3, &[0.5], 3).is_err());
        assert!(gu_sequential_confidence(2, &[], 1).is_err());
    }

    #[test]
    fn gu_bound_examples() {
        let b = max_parties_gu(3, 0.5, 0.0).unwrap();
        assert!((b.bound - 2.0).abs() < 1e-12);
        assert_eq!(b.admissible, Some(1));
        assert_eq!(parties_by_iteration_gu(3, 0.5, 0.0, 100), Some(1));
        let b = max_parties_gu(4, 0.3, 0.5).unwrap();
        assert!((b.bound - (1.0 + 0.2f64.ln() / 0.75f64.ln())).abs() < 1e-12);
        assert_eq!(b.admissible, Some(6));
        assert_eq!(parties_by_iteration_gu(4, 0.3, 0.5, 100), Some(6));
        assert_eq!(max_parties_gu(3, 0.5, 1.0).unwrap().admissible, None);
        // Without measurement the first party already sits at the threshold.
        for c_th in [0.5, 0.6] {
            let b = max_parties_gu(4, c_th, 1.0).unwrap();
            assert_eq!(b.admissible, Some(0));
            assert_eq!(b.admissible, parties_by_iteration_gu(4, c_th, 1.0, 100));
        }
    }

    #[test]
    fn integer_bound_excludes_the_tie() {
        // C^(3) = 5/12 exactly at eta0 = 0.
        let b = max_parties_gu(3, 5.0 / 12.0, 0.0).unwrap();
        assert_eq!(b.bound, 3.0);
        assert_eq!(b.admissible, Some(2));
        assert_eq!(parties_by_iteration_gu(3, 5.0 / 12.0, 0.0, 100), Some(2));
    }

    #[test]
    fn trine_drop_is_quarter_eps() {
        let ens = gu_ensemble(3).unwrap();
        let zero = confidence_drop_small_eps(&trine_povm(), &ens, 0.0).unwrap();
        assert!((zero.c2 - zero.c1).abs() < 1e-12);
        let drop = confidence_drop_small_eps(&trine_povm(), &ens, 0.1).unwrap();
        assert!((drop.c2 - (1.0 - 0.1 / 4.0) * drop.c1).abs() < 1e-12);
        assert!((drop.linear_coefficient - 0.25).abs() < 1e-9);
    }
}
