//! Grid-search oracle for qubit confidences.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{out_of_range, Error, Result};
use crate::quantum::{bloch_from_density, Ensemble};

const REFINE_POINTS: usize = 41;

struct Ratio {
    q: f64,
    rx: [f64; 3],
    r: [f64; 3],
}

impl Ratio {
    /// `q (1 + r_x.n)/(1 + r.n)` at polar `t`, azimuth `f`.
    fn at(&self, t: f64, f: f64) -> f64 {
        let n = [t.sin() * f.cos(), t.sin() * f.sin(), t.cos()];
        let dot = |v: &[f64; 3]| v[0] * n[0] + v[1] * n[1] + v[2] * n[2];
        let den = 1.0 + dot(&self.r);
        if den <= 1e-15 {
            return f64::NEG_INFINITY;
        }
        self.q * (1.0 + dot(&self.rx)) / den
    }
}

fn best_on(
    ratio: &Ratio,
    rows: usize,
    cols: usize,
    polar: impl Fn(usize) -> f64 + Sync,
    azimuth: impl Fn(usize) -> f64 + Sync,
) -> (f64, f64, f64) {
    (0..rows)
        .into_par_iter()
        .map(|i| {
            let t = polar(i);
            (0..cols)
                .map(|j| {
                    let f = azimuth(j);
                    (ratio.at(t, f), t, f)
                })
                .fold((f64::NEG_INFINITY, 0.0, 0.0), pick_max)
        })
        .reduce(|| (f64::NEG_INFINITY, 0.0, 0.0), pick_max)
}

// Ties resolve to the smaller (polar, azimuth) so parallel and sequential agree.
fn pick_max(a: (f64, f64, f64), b: (f64, f64, f64)) -> (f64, f64, f64) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if (b.1, b.2) < (a.1, a.2) {
                b
            } else {
                a
            }
        }
    }
}

/// Lower bound on `C_x` from a `(grid + 1) x grid` polar/azimuth mesh of
/// rank-one projectors followed by one `41 x 41` refinement spanning one
/// coarse cell on each side of the best point.
pub fn brute_force_confidence_qubit(ens: &Ensemble, x: usize, grid: usize) -> Result<f64> {
    if ens.dim() != 2 {
        return Err(Error::NotQubit(ens.dim()));
    }
    if x == 0 || x > ens.len() {
        return Err(out_of_range("x", format!("label {x} not in 1..={}", ens.len())));
    }
    if grid < 2 {
        return Err(out_of_range("grid", "must be at least 2"));
    }
    let ratio = Ratio {
        q: ens.priors()[x - 1],
        rx: bloch_from_density(&ens.states()[x - 1])?,
        r: bloch_from_density(&ens.average())?,
    };
    let h = PI / grid as f64;
    let coarse = best_on(
        &ratio,
        grid + 1,
        grid,
        |i| h * i as f64,
        |j| 2.0 * h * j as f64,
    );
    let step = 2.0 * h / (REFINE_POINTS - 1) as f64;
    let fine = best_on(
        &ratio,
        REFINE_POINTS,
        REFINE_POINTS,
        |i| (coarse.1 - h + step * i as f64).clamp(0.0, PI),
        |j| coarse.2 - 2.0 * h + 2.0 * step * j as f64,
    );
    Ok(pick_max(coarse, fine).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::two_state_confidence;
    use crate::quantum::{gu_ensemble, two_state_ensemble};

    #[test]
    fn orthogonal_pair_reaches_one() {
        let ens = two_state_ensemble(1.0, PI / 2.0).unwrap();
        assert!(brute_force_confidence_qubit(&ens, 1, 400).unwrap() >= 0.9999);
    }

    #[test]
    fn trine_two_thirds() {
        let ens = gu_ensemble(3).unwrap();
        for x in 1..=3 {
            let c = brute_force_confidence_qubit(&ens, x, 400).unwrap();
            assert!((c - 2.0 / 3.0).abs() < 1e-4);
        }
    }

    #[test]
    fn matches_closed_form() {
        let (p, t) = (0.8, PI / 3.0);
        let ens = two_state_ensemble(p, t).unwrap();
        let want = two_state_confidence(p, t).unwrap();
        for x in 1..=2 {
            let c = brute_force_confidence_qubit(&ens, x, 400).unwrap();
            assert!(c <= want + 1e-12 && want - c < 1e-4);
        }
    }

    #[test]
    fn rejects_non_qubits() {
        let ens = crate::quantum::random::random_ensemble(
            &mut crate::quantum::random::Seeder::new(1).stream(0),
            3,
            2,
            1,
        )
        .unwrap();
        assert!(matches!(brute_force_confidence_qubit(&ens, 1, 10), Err(Error::NotQubit(3))));
    }
}
