//! The two parametric ensemble families studied here.

use std::f64::consts::PI;

use super::{DensityOperator, Ensemble, PureState};
use crate::error::{out_of_range, Result};
use crate::linalg::{ComplexMatrix, C64};

/// `cos(theta/2)|0> - (-1)^x sin(theta/2)|1>` for label `x` in `{1, 2}`.
pub fn two_state_vector(theta: f64, label: usize) -> Result<PureState> {
    if !(theta > 0.0 && theta < PI) {
        return Err(out_of_range("theta", format!("{theta} not in (0, pi)")));
    }
    let sign = match label {
        1 => 1.0,
        2 => -1.0,
        _ => return Err(out_of_range("label", format!("{label} not in {{1, 2}}"))),
    };
    PureState::qubit((theta / 2.0).cos(), sign * (theta / 2.0).sin())
}

/// Equal-prior pair `rho_x = p|psi_x><psi_x| + (1-p) I/2`.
pub fn two_state_ensemble(p: f64, theta: f64) -> Result<Ensemble> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(out_of_range("p", format!("{p} not in (0, 1]")));
    }
    let noise = ComplexMatrix::identity(2).scale((1.0 - p) / 2.0);
    let states = (1..=2)
        .map(|x| {
            let psi = two_state_vector(theta, x)?;
            DensityOperator::new(&psi.projector().scale(p) + &noise)
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(format!("two_state(p={p}, theta={theta})"), vec![0.5, 0.5], states)
}

/// `(|0> + e^{2 pi i k/n}|1>)/sqrt(2)`
pub fn gu_state(n: usize, k: usize) -> Result<PureState> {
    if n < 2 {
        return Err(out_of_range("n", format!("{n} < 2")));
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let phase = 2.0 * PI * k as f64 / n as f64;
    PureState::new(vec![C64::new(r, 0.0), C64::from_polar(r, phase)])
}

/// Geometric-uniform pure qubit states `k = 1..=n` with priors `1/n`.
pub fn gu_ensemble(n: usize) -> Result<Ensemble> {
    let states = (1..=n)
        .map(|k| Ok(gu_state(n, k)?.density()))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(format!("gu(n={n})"), vec![1.0 / n as f64; n], states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::bloch_from_density;

    #[test]
    fn orthogonal_pure_pair_at_right_angle() {
        let a = two_state_vector(PI / 2.0, 1).unwrap();
        let b = two_state_vector(PI / 2.0, 2).unwrap();
        assert!(a.overlap(&b) < 1e-15);
        let ens = two_state_ensemble(1.0, PI / 2.0).unwrap();
        assert!((ens.states()[0].purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_state_overlap_is_cos_theta() {
        for &t in &[0.3, 1.0, 2.0, 3.0] {
            let a = two_state_vector(t, 1).unwrap();
            let b = two_state_vector(t, 2).unwrap();
            assert!((a.inner(&b).re - t.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(two_state_ensemble(0.0, 1.0).is_err());
        assert!(two_state_ensemble(1.1, 1.0).is_err());
        assert!(two_state_ensemble(0.5, 0.0).is_err());
        assert!(two_state_ensemble(0.5, PI).is_err());
        assert!(two_state_vector(1.0, 3).is_err());
        assert!(gu_ensemble(1).is_err());
    }

    #[test]
    fn tiny_p_is_nearly_maximally_mixed() {
        let ens = two_state_ensemble(1e-9, 1.0).unwrap();
        for s in ens.states() {
            assert!(s.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-9);
        }
    }

    #[test]
    fn bloch_vectors_sit_at_polar_angle_theta() {
        let (p, t) = (0.8, PI / 3.0);
        let ens = two_state_ensemble(p, t).unwrap();
        for (i, s) in ens.states().iter().enumerate() {
            let v = bloch_from_density(s).unwrap();
            let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((len - p).abs() < 1e-12);
            assert!(((v[2] / len).acos() - t).abs() < 1e-12);
            let sign = if i == 0 { 1.0 } else { -1.0 };
            assert!((v[0] - sign * p * t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn gu_two_is_plus_minus() {
        let ens = gu_ensemble(2).unwrap();
        let minus = PureState::qubit(1.0, -1.0).unwrap();
        let plus = PureState::qubit(1.0, 1.0).unwrap();
        assert!(ens.states()[0].matrix().max_abs_diff(&minus.projector()) < 1e-15);
        assert!(ens.states()[1].matrix().max_abs_diff(&plus.projector()) < 1e-15);
        let avg = ens.average();
        assert!(avg.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn trine_projectors_sum_to_three_halves_identity() {
        let total: ComplexMatrix = (1..=3).map(|k| gu_state(3, k).unwrap().projector()).sum();
        assert!(total.max_abs_diff(&ComplexMatrix::identity(2).scale(1.5)) < 1e-10);
    }

    #[test]
    fn gu_six_overlaps() {
        let ens = gu_ensemble(6).unwrap();
        assert!(ens.average().matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-14);
        for j in 1..=6 {
            for k in 1..=6 {
                let o = gu_state(6, j).unwrap().overlap(&gu_state(6, k).unwrap());
                let want = (PI * (j as f64 - k as f64) / 6.0).cos().abs();
                assert!((o - want).abs() < 1e-14);
            }
        }
    }
}
