use seqmc_core::mc::{guessing_probability, solve_mc};
use seqmc_core::quantum::random::{random_ensemble, Seeder};
use seqmc_core::quantum::{gu_ensemble, two_state_ensemble};
use seqmc_core::sequential::{
    check_dpi, max_parties_two_state, parties_by_iteration_two_state, run_sequential, Policy,
    RunConfig, TargetPolicy,
};
use seqmc_core::weak::{gu_bloch_length, gu_sequential_confidence};
use seqmc_core::quantum::bloch_from_density;

#[test]
fn equal_confidence_for_random_independent_ensembles() {
    let seeder = Seeder::new(2025);
    let mut full = 0;
    for i in 0..100 {
        let mut rng = seeder.stream(i);
        let d = 2 + (i as usize % 3);
        let n = 2 + (i as usize % (d - 1));
        let ens = random_ensemble(&mut rng, d, n, 1 + (i as usize % 2)).unwrap();
        // A fifth of the largest feasible conclusive rate.
        let eta_min = guessing_probability(&ens, &solve_mc(&ens).unwrap()).eta0;
        let mut cfg = RunConfig::equal_eta0(3, 1.0 - 0.2 * (1.0 - eta_min));
        cfg.targets = TargetPolicy::Gram;
        let run = run_sequential(&ens, &cfg).unwrap();
        assert!(run.records.len() >= 2, "draw {i}: {:?}", run.termination);
        full += usize::from(run.records.len() == 3);
        for x in 0..n {
            let first = run.records[0].solution.outcomes[x].confidence;
            for r in &run.records {
                assert!(r.independent);
                assert!((r.solution.outcomes[x].confidence - first).abs() < 1e-8, "draw {i}");
            }
        }
    }
    assert!(full >= 80, "only {full} runs reached three parties");
}

#[test]
fn two_state_run_invariants() {
    for &(p, t, eta0) in &[(0.8, 1.0471975511965976, 0.9), (0.5, 0.4, 0.95), (0.9, 2.5, 0.85)] {
        let ens = two_state_ensemble(p, t).unwrap();
        let run = run_sequential(&ens, &RunConfig::equal_eta0(4, eta0)).unwrap();
        let s = run.overlaps();
        let e = run.eta0s();
        for res in run.tradeoff_residuals() {
            assert!(res < 1e-8);
        }
        // Product law.
        let last = s.len() - 1;
        let product: f64 = e[..last].iter().product();
        assert!((product - s[0] / s[last]).abs() < 1e-8);
        for w in s.windows(2) {
            assert!(w[1] > w[0]);
        }
        for r in &run.records {
            assert!(r.decomposition_residual.unwrap() < 1e-8);
            if let Some(ch) = &r.channel {
                let st = r.ensemble.states();
                assert!(check_dpi(&st[0], &st[1], ch).unwrap().pass);
            }
        }
    }
}

#[test]
fn guessing_policy_matches_requested_g() {
    let ens = two_state_ensemble(0.8, 1.0).unwrap();
    let mut cfg = RunConfig::equal_eta0(3, 0.9);
    cfg.policy = Policy::Guessing(vec![0.05]);
    let run = run_sequential(&ens, &cfg).unwrap();
    for r in &run.records {
        assert!((r.guessing.g - 0.05).abs() < 1e-12);
    }
}

#[test]
fn bound_matches_iteration_on_seeded_triples() {
    let seeder = Seeder::new(21);
    for i in 0..50 {
        use rand::Rng;
        let mut rng = seeder.stream(i);
        let s1: f64 = rng.random_range(0.05..0.9);
        let eta0: f64 = rng.random_range(0.3..0.99);
        let delta: f64 = rng.random_range(0.001..(1.0 - s1));
        let b = max_parties_two_state(s1, eta0, delta).unwrap();
        let it = parties_by_iteration_two_state(s1, eta0, delta, 100_000);
        assert_eq!(b.admissible, it);
        assert_eq!(b.admissible, Some(b.bound.floor() as u64));
    }
}

#[test]
fn gu_propagation_matches_decay_formulas() {
    for n in 3..=6 {
        let ens = gu_ensemble(n).unwrap();
        let rates = [0.5, 0.2, 0.9, 0.0, 0.7];
        let mut cfg = RunConfig::equal_eta0(6, 0.0);
        cfg.policy = Policy::Eta0(rates.to_vec());
        let run = run_sequential(&ens, &cfg).unwrap();
        assert_eq!(run.records.len(), 6);
        for (j, r) in run.records.iter().enumerate() {
            let want = gu_sequential_confidence(n, &rates[..j], j + 1).unwrap();
            for o in &r.solution.outcomes {
                assert!((o.confidence - want).abs() < 1e-9);
            }
            let len = gu_bloch_length(&rates[..j]).unwrap();
            let v = bloch_from_density(&r.ensemble.states()[0]).unwrap();
            assert!(((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - len).abs() < 1e-10);
            if j > 0 {
                assert!(r.min_confidence() < run.records[j - 1].min_confidence());
            }
        }
    }
}

#[test]
fn weakening_keeps_the_argmax() {
    let ens = gu_ensemble(4).unwrap();
    let base = solve_mc(&ens).unwrap();
    let c = base.max_equal_weight().unwrap();
    let weak = base.with_weights(&[0.3 * c; 4]).unwrap();
    let rho = ens.average();
    for (a, b) in base.outcomes.iter().zip(&weak.outcomes) {
        let ratio = |w: f64| {
            let m = a.direction.projector().scale(w);
            ens.priors()[a.label - 1] * ens.states()[a.label - 1].expectation(&m) / rho.expectation(&m)
        };
        assert!((ratio(a.weight) - ratio(b.weight)).abs() < 1e-12);
    }
}
