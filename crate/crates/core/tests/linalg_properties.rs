use proptest::prelude::*;
use seqmc_core::linalg::{
    ensemble_from_gram, gram_matrix, numerical_rank, numerical_rank_with_tol, trace_norm,
};
use seqmc_core::quantum::random::{haar_state, random_channel, Seeder};
use seqmc_core::{ComplexMatrix, C64};

fn hermitian_from(seed: u64, d: usize) -> ComplexMatrix {
    let mut rng = Seeder::new(seed).stream(0);
    let v: Vec<_> = (0..3).map(|_| haar_state(&mut rng, d).unwrap()).collect();
    let w = [0.9, -0.4, 0.25];
    v.iter()
        .zip(w)
        .map(|(s, x)| s.projector().scale(x))
        .fold(ComplexMatrix::zeros(d), |a, b| &a + &b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_norm_triangle_inequality(seed in any::<u64>(), d in 2usize..5) {
        let a = hermitian_from(seed, d);
        let b = hermitian_from(seed.wrapping_add(1), d);
        let lhs = trace_norm(&(&a + &b)).unwrap();
        let rhs = trace_norm(&a).unwrap() + trace_norm(&b).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn trace_norm_unitary_invariance(seed in any::<u64>(), d in 2usize..5) {
        let a = hermitian_from(seed, d);
        let mut rng = Seeder::new(seed).stream(1);
        // A single-operator complete channel is a unitary.
        let u = random_channel(&mut rng, d, 1).unwrap().operators()[0].clone();
        prop_assert!(u.is_unitary(1e-9));
        let rotated = u.sandwich(&a);
        prop_assert!((trace_norm(&rotated).unwrap() - trace_norm(&a).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn gram_round_trip(seed in any::<u64>(), n in 1usize..5, d in 1usize..5) {
        let mut rng = Seeder::new(seed).stream(0);
        let vs: Vec<_> = (0..n).map(|_| haar_state(&mut rng, d).unwrap()).collect();
        let ws: Vec<f64> = (0..n).map(|i| 0.1 + i as f64 * 0.3).collect();
        let g = gram_matrix(&vs, &ws).unwrap();
        let (vs2, ws2) = ensemble_from_gram(&g).unwrap();
        prop_assert!(gram_matrix(&vs2, &ws2).unwrap().max_abs_diff(&g) < 1e-8);
    }

    #[test]
    fn rank_is_permutation_and_scale_invariant(seed in any::<u64>(), n in 1usize..6, d in 1usize..5, k in 0.01f64..100.0) {
        let mut rng = Seeder::new(seed).stream(0);
        let vs: Vec<Vec<C64>> = (0..n).map(|_| haar_state(&mut rng, d).unwrap().amplitudes().to_vec()).collect();
        let r = numerical_rank(&vs);
        prop_assert_eq!(r, n.min(d));
        let mut rev = vs.clone();
        rev.reverse();
        prop_assert_eq!(numerical_rank(&rev), r);
        let scaled: Vec<Vec<C64>> = vs.iter().map(|v| v.iter().map(|z| z * k).collect()).collect();
        prop_assert_eq!(numerical_rank_with_tol(&scaled, 1e-8), r);
    }
}

#[test]
fn half_trace_distance_of_pure_states() {
    let v1 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let v2 = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    let diff = &ComplexMatrix::projector(&v1) - &ComplexMatrix::projector(&v2);
    let half = 0.5 * trace_norm(&diff).unwrap();
    assert!((half - (1.0f64 - 0.36).sqrt()).abs() < 1e-12);
    assert!((half - 0.8).abs() < 1e-12);
}

#[test]
fn closed_form_directions_are_independent() {
    let dirs = seqmc_core::mc::two_state_directions(0.8, std::f64::consts::FRAC_PI_3).unwrap();
    assert!(dirs[0].overlap(&dirs[1]) < 1.0);
    assert_eq!(numerical_rank(&dirs), 2);
}
