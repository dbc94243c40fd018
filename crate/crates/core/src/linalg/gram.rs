use super::{eig_hermitian, inner, ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::tol;

/// Weighted Gram matrix `G_ij = sqrt(w_i w_j) <v_i|v_j>`.
pub fn gram_matrix<V: AsRef<[C64]>>(vectors: &[V], weights: &[f64]) -> Result<ComplexMatrix> {
    if vectors.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: vectors.len(),
            actual: weights.len(),
        });
    }
    if vectors.is_empty() {
        return Err(Error::InvalidState("empty vector list".into()));
    }
    let d = vectors[0].as_ref().len();
    for v in vectors {
        if v.as_ref().len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: v.as_ref().len(),
            });
        }
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(crate::error::out_of_range(
            "weights",
            "weights must be finite and nonnegative",
        ));
    }
    let roots: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    Ok(ComplexMatrix::from_fn(vectors.len(), |i, j| {
        inner(vectors[i].as_ref(), vectors[j].as_ref()) * (roots[i] * roots[j])
    }))
}

/// Recovers a weighted ensemble from its Gram matrix.
///
/// Factorises `G = V D^2 V^dag` and takes the columns of `D V^dag` restricted
/// to the nonzero spectrum, giving `n` vectors in dimension `rank(G)`. Each
/// column is split into its squared norm (the weight `G_ii`) and a unit
/// vector; zero columns get the first basis vector.
pub fn ensemble_from_gram(g: &ComplexMatrix) -> Result<(Vec<Vec<C64>>, Vec<f64>)> {
    let spec = eig_hermitian(g)?;
    let scale = spec.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if spec.min() < -tol::DECISION * scale {
        return Err(Error::NotPsd(spec.min()));
    }
    let threshold = tol::DECISION * scale;
    let kept: Vec<usize> = (0..spec.dim())
        .filter(|&k| spec.values[k] > threshold)
        .collect();
    let rank = kept.len().max(1);
    let n = g.dim();

    let mut vectors = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Column i of D V^dag: entries sqrt(lambda_k) conj(V_ik).
        let mut col: Vec<C64> = kept
            .iter()
            .map(|&k| spec.vectors[k][i].conj() * spec.values[k].sqrt())
            .collect();
        if col.is_empty() {
            col.push(ZERO);
        }
        let w: f64 = col.iter().map(|z| z.norm_sqr()).sum();
        if w > 0.0 {
            let r = w.sqrt();
            col.iter_mut().for_each(|z| *z /= r);
        } else {
            col = vec![ZERO; rank];
            col[0] = C64::new(1.0, 0.0);
        }
        vectors.push(col);
        weights.push(w);
    }
    Ok((vectors, weights))
}

/// Singular values (descending) of the `d x n` matrix whose columns are `columns`.
///
/// Computed as the nonnegative eigenvalues of the Hermitian dilation
/// `[[0, A], [A^dag, 0]]`, which keeps absolute accuracy near zero.
pub fn singular_values<V: AsRef<[C64]>>(columns: &[V]) -> Result<Vec<f64>> {
    let n = columns.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let d = columns[0].as_ref().len();
    let size = d + n;
    let mut dil = ComplexMatrix::zeros(size);
    for (j, col) in columns.iter().enumerate() {
        let col = col.as_ref();
        if col.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: col.len(),
            });
        }
        for (i, &z) in col.iter().enumerate() {
            dil[(i, d + j)] = z;
            dil[(d + j, i)] = z.conj();
        }
    }
    let spec = eig_hermitian(&dil)?;
    Ok(spec.values.into_iter().take(d.min(n)).map(|s| s.max(0.0)).collect())
}

/// Numerical rank of a list of vectors at the default relative tolerance.
pub fn numerical_rank<V: AsRef<[C64]>>(vectors: &[V]) -> usize {
    numerical_rank_with_tol(vectors, tol::DECISION)
}

/// Number of singular values above `tol` times the largest one.
pub fn numerical_rank_with_tol<V: AsRef<[C64]>>(vectors: &[V], tol: f64) -> usize {
    let Ok(sv) = singular_values(vectors) else {
        return 0;
    };
    let Some(&top) = sv.first() else {
        return 0;
    };
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::super::ONE;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_unit(rng: &mut ChaCha20Rng, d: usize) -> Vec<C64> {
        let v: Vec<C64> = (0..d)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let n = super::super::norm(&v);
        v.into_iter().map(|z| z / n).collect()
    }

    #[test]
    fn orthonormal_basis_gives_identity() {
        let basis = vec![vec![ONE, ZERO], vec![ZERO, ONE]];
        let g = gram_matrix(&basis, &[1.0, 1.0]).unwrap();
        assert_eq!(g, ComplexMatrix::identity(2));
    }

    #[test]
    fn two_vector_off_diagonal() {
        let s = 0.3;
        let v1 = vec![ONE, ZERO];
        let v2 = vec![C64::new(s, 0.0), C64::new((1.0 - s * s).sqrt(), 0.0)];
        let (a1, a2) = (0.7, 0.2);
        let g = gram_matrix(&[v1, v2], &[a1, a2]).unwrap();
        assert!((g[(0, 1)].re - (a1 * a2).sqrt() * s).abs() < 1e-15);
        assert!((g[(1, 0)].re - (a1 * a2).sqrt() * s).abs() < 1e-15);
    }

    #[test]
    fn gram_rejects_mismatched_lengths() {
        let v = vec![vec![ONE, ZERO]];
        assert!(matches!(
            gram_matrix(&v, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let w = vec![vec![ONE, ZERO], vec![ONE]];
        assert!(gram_matrix(&w, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn random_gram_is_psd() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..50 {
            let vs: Vec<_> = (0..4).map(|_| random_unit(&mut rng, 3)).collect();
            let ws: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let g = gram_matrix(&vs, &ws).unwrap();
            assert!(eig_hermitian(&g).unwrap().min() >= -1e-10);
        }
    }

    #[test]
    fn identity_gram_round_trip() {
        let (vs, ws) = ensemble_from_gram(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(vs.len(), 3);
        for w in &ws {
            assert!((w - 1.0).abs() < 1e-12);
        }
        let back = gram_matrix(&vs, &ws).unwrap();
        assert!(back.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn rank_one_gram_gives_parallel_vectors_in_dimension_one() {
        let u = vec![C64::new(0.5, 0.0), C64::new(0.0, 0.5), C64::new(0.5, 0.5)];
        let g = ComplexMatrix::projector(&u);
        let (vs, ws) = ensemble_from_gram(&g).unwrap();
        assert!(vs.iter().all(|v| v.len() == 1));
        assert!(gram_matrix(&vs, &ws).unwrap().max_abs_diff(&g) < 1e-12);
    }

    #[test]
    fn seeded_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.random_range(2..5);
            let d = rng.random_range(2..5);
            let vs: Vec<_> = (0..n).map(|_| random_unit(&mut rng, d)).collect();
            let ws: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.01).collect();
            let g = gram_matrix(&vs, &ws).unwrap();
            let (vs2, ws2) = ensemble_from_gram(&g).unwrap();
            assert!(vs2[0].len() <= n.min(d));
            let g2 = gram_matrix(&vs2, &ws2).unwrap();
            assert!(g2.max_abs_diff(&g) < 1e-8);
        }
    }

    #[test]
    fn non_psd_gram_rejected() {
        let g = ComplexMatrix::diagonal(&[1.0, -0.5]);
        assert!(matches!(ensemble_from_gram(&g), Err(Error::NotPsd(_))));
    }

    #[test]
    fn rank_of_basis_and_trine() {
        assert_eq!(numerical_rank(&[vec![ONE, ZERO], vec![ZERO, ONE]]), 2);
        let trine: Vec<Vec<C64>> = (1..=3)
            .map(|k| {
                let ph = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                vec![
                    C64::new(0.5f64.sqrt(), 0.0),
                    C64::from_polar(0.5f64.sqrt(), ph),
                ]
            })
            .collect();
        assert_eq!(numerical_rank(&trine), 2);
        // Exactly parallel vectors collapse to rank one.
        let par = vec![vec![ONE, ZERO], vec![C64::new(0.0, 2.0), ZERO]];
        assert_eq!(numerical_rank(&par), 1);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let cols = vec![vec![C64::new(3.0, 0.0), ZERO], vec![ZERO, C64::new(0.0, -0.5)]];
        let sv = singular_values(&cols).unwrap();
        assert!((sv[0] - 3.0).abs() < 1e-14 && (sv[1] - 0.5).abs() < 1e-14);
    }
}
