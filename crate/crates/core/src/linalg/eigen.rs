//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the classical real Jacobi rotation, so that the
//! accumulated transform stays unitary and the diagonal stays real.

use std::cmp::Ordering;

use super::{normalize_with_phase, ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::tol;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSpectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl HermitianSpectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    /// `sum_i f(lambda_i) |v_i><v_i|`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d);
        for (&lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += v[i] * v[j].conj() * w;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| x)
    }
}

/// Diagonalises a Hermitian matrix.
///
/// Input asymmetry above `tol::HERMITIAN_REJECT` is an error; smaller
/// asymmetry is removed by taking the Hermitian part. Eigenvectors are phase
/// normalised (first significant entry real positive); eigenvalues that tie
/// are ordered lexicographically by the real parts of their eigenvectors.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<HermitianSpectrum> {
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let defect = h.hermitian_defect();
    if defect > tol::HERMITIAN_REJECT {
        return Err(Error::NotHermitian(defect));
    }
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let col = v.column(k);
            let col = normalize_with_phase(&col).unwrap_or(col);
            (a[(k, k)].re, col)
        })
        .collect();

    let tie = 1e-12 * scale.max(1.0);
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && (pairs[start].0 - pairs[end].0).abs() <= tie {
            end += 1;
        }
        pairs[start..end].sort_by(|x, y| lexicographic_real_desc(&x.1, &y.1));
        start = end;
    }

    let (values, vectors) = pairs.into_iter().unzip();
    Ok(HermitianSpectrum { values, vectors })
}

fn lexicographic_real_desc(x: &[C64], y: &[C64]) -> Ordering {
    for (a, b) in x.iter().zip(y) {
        match b.re.total_cmp(&a.re) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Negligible pivot relative to both diagonal entries: skip.
    if b <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / b;
    let theta = (aqq - app) / (2.0 * b);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane.
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::super::{inner, ONE};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_hermitian(rng: &mut ChaCha20Rng, d: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(d, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        (&g + &g.adjoint()).scale(0.5)
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let s = eig_hermitian(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(s.values, vec![1.0, 1.0]);
    }

    #[test]
    fn pauli_z_is_already_diagonal() {
        let s = eig_hermitian(&ComplexMatrix::diagonal(&[1.0, -1.0])).unwrap();
        assert_eq!(s.values, vec![1.0, -1.0]);
        assert_eq!(s.vectors[0], vec![ONE, ZERO]);
        assert_eq!(s.vectors[1], vec![ZERO, ONE]);
    }

    #[test]
    fn pauli_y_eigenvectors() {
        let y = ComplexMatrix::from_rows(vec![
            vec![ZERO, C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), ZERO],
        ])
        .unwrap();
        let s = eig_hermitian(&y).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-14 && (s.values[1] + 1.0).abs() < 1e-14);
        let r = 1.0 / 2f64.sqrt();
        assert!((s.vectors[0][0] - C64::new(r, 0.0)).norm() < 1e-14);
        assert!((s.vectors[0][1] - C64::new(0.0, r)).norm() < 1e-14);
    }

    #[test]
    fn rejects_clearly_non_hermitian_input() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 1e-3], &[0.0, 1.0]]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn deterministic_output() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 5);
        assert_eq!(eig_hermitian(&h).unwrap(), eig_hermitian(&h).unwrap());
    }

    #[test]
    fn degenerate_ties_are_ordered_lexicographically() {
        let h = ComplexMatrix::diagonal(&[2.0, 2.0, 1.0]);
        let s = eig_hermitian(&h).unwrap();
        assert_eq!(s.vectors[0], vec![ONE, ZERO, ZERO]);
        assert_eq!(s.vectors[1], vec![ZERO, ONE, ZERO]);
    }

    #[test]
    fn seeded_reconstruction_and_orthonormality() {
        let mut rng = ChaCha20Rng::seed_from_u64(20_240_611);
        for &d in &[2usize, 3, 4, 8] {
            for _ in 0..250 {
                let h = random_hermitian(&mut rng, d);
                let s = eig_hermitian(&h).unwrap();
                assert!(s.reconstruct().max_abs_diff(&h) < 1e-9);
                for w in s.values.windows(2) {
                    assert!(w[0] >= w[1]);
                }
                for i in 0..d {
                    for j in 0..d {
                        let ip = inner(&s.vectors[i], &s.vectors[j]);
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((ip - C64::new(want, 0.0)).norm() < 1e-10);
                    }
                }
            }
        }
    }
}
