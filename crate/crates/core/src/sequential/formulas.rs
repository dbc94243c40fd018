//! Closed-form two-state relations and the data-processing check.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::linalg::trace_norm;
use crate::quantum::{DensityOperator, KrausChannel};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapGrowth {
    /// `[(1 - c_1 D^2)(1 - c_2 D^2)]^{-1/2}`
    pub t: f64,
    pub overlap_out: f64,
}

/// Growth of the direction overlap from one party to the next.
pub fn overlap_growth(c1: f64, c2: f64, overlap_in: f64) -> Result<OverlapGrowth> {
    if !(0.0..1.0).contains(&overlap_in) {
        return Err(out_of_range("overlap_in", format!("{overlap_in} not in [0, 1)")));
    }
    if !(c1 >= 0.0 && c2 >= 0.0) {
        return Err(out_of_range("c", "weights must be nonnegative"));
    }
    let d2 = 1.0 - overlap_in * overlap_in;
    for c in [c1, c2] {
        if c * d2 >= 1.0 {
            return Err(Error::DivergentT(c * d2));
        }
    }
    let t = 1.0 / ((1.0 - c1 * d2) * (1.0 - c2 * d2)).sqrt();
    Ok(OverlapGrowth {
        t,
        overlap_out: t * overlap_in,
    })
}

/// Equal weights spending guessing probability `g` with the least overlap growth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeastDisturbing {
    /// `c_1 = c_2 = G/(C (1 - s^2))`
    pub c: f64,
    /// Next overlap `s/(1 - G/C)`.
    pub overlap_next: f64,
    /// `1 - G/C`
    pub eta0: f64,
}

pub fn least_disturbing_params(confidence: f64, g: f64, overlap: f64) -> Result<LeastDisturbing> {
    if !(0.0..1.0).contains(&overlap) {
        return Err(out_of_range("overlap", format!("{overlap} not in [0, 1)")));
    }
    if !(confidence > 0.0 && confidence <= 1.0) {
        return Err(out_of_range("confidence", format!("{confidence} not in (0, 1]")));
    }
    if !(g >= 0.0 && g < confidence) {
        return Err(out_of_range("g", format!("{g} not in [0, C)")));
    }
    let eta0 = 1.0 - g / confidence;
    let c = g / (confidence * (1.0 - overlap * overlap));
    let overlap_next = overlap / eta0;
    if overlap_next >= 1.0 {
        return Err(Error::TargetUnreachable(format!(
            "next overlap {overlap_next} is not below 1"
        )));
    }
    if c > 1.0 / (1.0 + overlap) + tol::STRUCTURAL {
        return Err(Error::TargetUnreachable(format!(
            "weight {c} leaves the inconclusive element non-PSD"
        )));
    }
    Ok(LeastDisturbing {
        c,
        overlap_next,
        eta0,
    })
}

/// Real party-count bound with the largest integer strictly below it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartyBound {
    /// `+inf` when measurements never disturb.
    pub bound: f64,
    /// `max(ceil(bound) - 1, 0)`; `None` when unbounded.
    pub admissible: Option<u64>,
}

impl PartyBound {
    /// A bound landing on an integer excludes that integer.
    pub(crate) fn from_bound(bound: f64) -> Self {
        let nearest = bound.round();
        let bound = if (bound - nearest).abs() <= tol::BOUND_TIE * nearest.abs().max(1.0) {
            nearest
        } else {
            bound
        };
        let admissible = bound
            .is_finite()
            .then(|| (bound.ceil() - 1.0).max(0.0) as u64);
        Self { bound, admissible }
    }
}

/// `log(s_1/(1 - delta))/log(eta0)`: the number of measuring transitions
/// `R` must lie strictly below it for the overlap to stay under `1 - delta`.
pub fn max_parties_two_state(s1: f64, eta0: f64, delta: f64) -> Result<PartyBound> {
    if !(s1 > 0.0 && s1 < 1.0) {
        return Err(out_of_range("s1", format!("{s1} not in (0, 1)")));
    }
    if !(eta0 > 0.0 && eta0 <= 1.0) {
        return Err(out_of_range("eta0", format!("{eta0} not in (0, 1]")));
    }
    if !(delta > 0.0 && delta <= 1.0 - s1 + 1e-12) {
        return Err(out_of_range("delta", format!("{delta} not in (0, 1 - s1]")));
    }
    if eta0 == 1.0 {
        return Ok(PartyBound::from_bound(f64::INFINITY));
    }
    let bound = (s1 / (1.0 - delta)).ln() / eta0.ln();
    Ok(PartyBound::from_bound(bound.max(0.0)))
}

/// Counts steps `s -> s/eta0` that keep `s < 1 - delta`, up to `cap`.
/// `None` when the cap is hit.
pub fn parties_by_iteration_two_state(s1: f64, eta0: f64, delta: f64, cap: u64) -> Option<u64> {
    let mut s = s1;
    for count in 0..=cap {
        let next = s / eta0;
        if next >= 1.0 - delta - tol::THRESHOLD_TIE {
            return Some(count);
        }
        s = next;
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpiReport {
    pub before: f64,
    pub after: f64,
    /// `before >= after - 1e-9`
    pub pass: bool,
}

/// Trace norms of `rho_1 - rho_2` before and after `channel`.
pub fn check_dpi(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    channel: &KrausChannel,
) -> Result<DpiReport> {
    if rho1.dim() != rho2.dim() || rho1.dim() != channel.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            actual: rho1.dim().max(rho2.dim()),
        });
    }
    let diff = rho1.matrix() - rho2.matrix();
    let before = trace_norm(&diff)?;
    let after = trace_norm(&channel.apply_operator(&diff))?;
    Ok(DpiReport {
        before,
        after,
        pass: before >= after - tol::STRUCTURAL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, C64};
    use crate::quantum::random::{ginibre_state, random_channel, Seeder};
    use crate::quantum::PureState;

    #[test]
    fn zero_weights_do_not_grow() {
        let g = overlap_growth(0.0, 0.0, 0.4).unwrap();
        assert_eq!(g.t, 1.0);
        assert_eq!(g.overlap_out, 0.4);
    }

    #[test]
    fn positive_weights_grow() {
        let g = overlap_growth(0.3, 0.1, 0.4).unwrap();
        assert!(g.t > 1.0 && g.overlap_out > 0.4);
        assert!(matches!(overlap_growth(2.0, 0.1, 0.4), Err(Error::DivergentT(_))));
    }

    #[test]
    fn least_disturbing_identities() {
        let z = least_disturbing_params(0.9, 0.0, 0.4).unwrap();
        assert_eq!(z.c, 0.0);
        assert_eq!(z.overlap_next, 0.4);
        let p = least_disturbing_params(0.9, 0.3, 0.4).unwrap();
        assert!((0.4 / p.overlap_next - p.eta0).abs() < 1e-15);
        // Equal weights reproduce the same growth.
        let g = overlap_growth(p.c, p.c, 0.4).unwrap();
        assert!((g.overlap_out - p.overlap_next).abs() < 1e-14);
        assert!(matches!(
            least_disturbing_params(0.9, 0.6, 0.4),
            Err(Error::TargetUnreachable(_))
        ));
    }

    #[test]
    fn two_state_bound_cases() {
        assert_eq!(max_parties_two_state(0.5, 1.0, 0.1).unwrap().admissible, None);
        let edge = max_parties_two_state(0.9, 0.5, 0.1).unwrap();
        assert_eq!(edge.bound, 0.0);
        assert_eq!(edge.admissible, Some(0));
        let b = max_parties_two_state(0.5, 0.8, 0.05).unwrap();
        assert_eq!(b.admissible, parties_by_iteration_two_state(0.5, 0.8, 0.05, 1000));
        assert!(max_parties_two_state(0.5, 0.8, 0.6).is_err());
    }

    #[test]
    fn dpi_unitary_equality_and_depolarizing_zero() {
        let a = PureState::qubit(1.0, 0.2).unwrap().density();
        let b = PureState::qubit(0.3, -1.0).unwrap().density();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = ComplexMatrix::from_rows(vec![
            vec![C64::new(h, 0.0), C64::new(0.0, h)],
            vec![C64::new(0.0, h), C64::new(h, 0.0)],
        ])
        .unwrap();
        let r = check_dpi(&a, &b, &KrausChannel::unitary(u).unwrap()).unwrap();
        assert!((r.before - r.after).abs() < 1e-10 && r.pass);
        let r = check_dpi(&a, &b, &KrausChannel::completely_depolarizing(2)).unwrap();
        assert!(r.after < 1e-15 && r.pass);
    }

    #[test]
    fn dpi_random_draws() {
        let seeder = Seeder::new(99);
        for i in 0..200 {
            let mut rng = seeder.stream(i);
            let d = 2 + (i as usize % 3);
            let a = ginibre_state(&mut rng, d, 1 + i as usize % d).unwrap();
            let b = ginibre_state(&mut rng, d, 1).unwrap();
            let ch = random_channel(&mut rng, d, 1 + i as usize % 4).unwrap();
            assert!(check_dpi(&a, &b, &ch).unwrap().pass);
        }
    }

    #[test]
    fn integer_bound_excludes_the_tie() {
        // 0.3 / 0.6^2 lands on 1 - delta = 0.8333...
        let (s1, eta0, delta) = (0.3, 0.6, 1.0 - 0.3 / 0.36);
        let b = max_parties_two_state(s1, eta0, delta).unwrap();
        assert_eq!(b.bound, 2.0);
        assert_eq!(b.admissible, Some(1));
        assert_eq!(parties_by_iteration_two_state(s1, eta0, delta, 100), Some(1));
    }
}
