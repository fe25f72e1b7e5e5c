//! Benchmarks for the numeric kernels: the Hermitian eigensolver, the CHSH
//! maximizer, sequential sampling, and the classical exhaustive CHSH scan.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cmm_core::classical::{chsh_exhaustive_in, FiniteProbSpace};
use cmm_core::linalg::{fixed, hermitian_eig};
use cmm_core::quantum::{chsh_maximize, random, DensityMatrix, HermitianObservable, QuantumModel};
use cmm_core::sampler::{self, CounterRng};
use cmm_core::{Tolerances, C64};

fn bench_hermitian_eig(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("hermitian_eig");
    for dim in [2usize, 4, 8, 16] {
        let mut rng = CounterRng::new(dim as u64);
        let m = random::hermitian(dim, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &m, |b, m| {
            b.iter(|| hermitian_eig(black_box(m), tol.cluster_rel, 1e-9).unwrap())
        });
    }
    group.finish();
}

fn bench_chsh_maximize(c: &mut Criterion) {
    c.bench_function("chsh_maximize_4_restarts", |b| {
        b.iter(|| chsh_maximize(4, black_box(7), 4, false).unwrap())
    });
}

fn bench_sequential_sampling(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut model = QuantumModel::new(2, tol);
    model
        .add_observable(HermitianObservable::new("sz", fixed::sigma_z(), &tol).unwrap())
        .unwrap();
    model
        .add_observable(HermitianObservable::new("sx", fixed::sigma_x(), &tol).unwrap())
        .unwrap();
    let zero = DensityMatrix::from_pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
    c.bench_function("sample_sequential_10k", |b| {
        b.iter(|| {
            sampler::sample_sequential(&model, black_box(&zero), "zero", "sx", "sz", 10_000, 5)
                .unwrap()
        })
    });
}

fn bench_classical_exhaustive_chsh(c: &mut Criterion) {
    let space = FiniteProbSpace::uniform((0..8).map(|i| i.to_string()).collect());
    let omega = space.omega();
    c.bench_function("classical_chsh_exhaustive_8pts", |b| {
        b.iter(|| chsh_exhaustive_in(black_box(&space), omega).unwrap())
    });
}

criterion_group!(
    benches,
    bench_hermitian_eig,
    bench_chsh_maximize,
    bench_sequential_sampling,
    bench_classical_exhaustive_chsh
);
criterion_main!(benches);
