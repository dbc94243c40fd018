use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use seqmc_bench::{random_pure, trine, two_state, SEED};
use seqmc_core::linalg::eig_hermitian;
use seqmc_core::mc::{brute_force_confidence_qubit, certify_optimality, solve_mc};
use seqmc_core::quantum::sample_run;
use seqmc_core::sequential::{build_from_solution, run_sequential, RunConfig, TargetPolicy};

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("eig_hermitian");
    for d in [2usize, 4, 8, 16] {
        let rho = random_pure(d, d).average();
        group.bench_with_input(BenchmarkId::from_parameter(d), rho.matrix(), |b, m| {
            b.iter(|| eig_hermitian(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn mc_solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_mc");
    group.bench_function("two_state", |b| {
        let ens = two_state();
        b.iter(|| solve_mc(black_box(&ens)).unwrap())
    });
    for d in [3usize, 6] {
        let ens = random_pure(d, d);
        group.bench_with_input(BenchmarkId::new("random_pure", d), &ens, |b, e| {
            b.iter(|| solve_mc(black_box(e)).unwrap())
        });
    }
    group.finish();

    let ens = two_state();
    let sol = solve_mc(&ens).unwrap();
    c.bench_function("certify_two_state", |b| {
        b.iter(|| certify_optimality(black_box(&ens), black_box(&sol)).unwrap())
    });
    c.bench_function("brute_force_grid_100", |b| {
        b.iter(|| brute_force_confidence_qubit(black_box(&ens), 1, 100).unwrap())
    });
}

fn channels(c: &mut Criterion) {
    let ens = random_pure(4, 3);
    let sol = solve_mc(&ens).unwrap();
    let c_max = sol.max_equal_weight().unwrap();
    let weighted = sol.with_weights(&[0.5 * c_max; 3]).unwrap();
    c.bench_function("build_channel_d4_n3", |b| {
        b.iter(|| build_from_solution(black_box(&weighted), &TargetPolicy::Gram).unwrap())
    });
}

fn protocols(c: &mut Criterion) {
    let ens = two_state();
    c.bench_function("run_two_state_4_parties", |b| {
        b.iter(|| run_sequential(black_box(&ens), &RunConfig::equal_eta0(4, 0.9)).unwrap())
    });
    let trine = trine();
    c.bench_function("run_trine_6_parties", |b| {
        b.iter(|| run_sequential(black_box(&trine), &RunConfig::equal_eta0(6, 0.5)).unwrap())
    });

    let run = run_sequential(&ens, &RunConfig::equal_eta0(4, 0.9)).unwrap();
    let instruments = run.instruments().unwrap();
    let mut group = c.benchmark_group("sample_run");
    group.sample_size(10);
    group.bench_function("two_state_4_parties_1e4", |b| {
        b.iter(|| sample_run(&ens, black_box(&instruments), SEED, 10_000).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eigensolver, mc_solver, channels, protocols);
criterion_main!(benches);
