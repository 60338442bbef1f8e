use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fwlab_bench::data1_field;
use fwlab_core::godunov::GodunovScheme;
use fwlab_core::waves::{solve_from_cosine, wave_residual};
use fwlab_core::{run, GodunovConfig, HelmholtzSolver, PeriodicGrid};

fn helmholtz(c: &mut Criterion) {
    let mut group = c.benchmark_group("helmholtz_apply");
    for n in [1000, 10_000, 100_000] {
        let u = data1_field(n);
        let solver = HelmholtzSolver::new(*u.grid());
        let mut scratch = vec![0.0; n];
        let mut out = vec![0.0; n];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solver.apply_nonlocal_into(black_box(u.values()), &mut scratch, &mut out))
        });
    }
    group.finish();
}

fn godunov_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("godunov_step");
    for n in [1000, 10_000, 100_000] {
        let u0 = data1_field(n);
        let tau = 0.4 * u0.grid().h() / 2.0;
        let mut scheme = GodunovScheme::new(*u0.grid(), true);
        let mut u = u0.values().to_vec();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| scheme.advance(black_box(&mut u), tau))
        });
    }
    group.finish();
}

fn godunov_run(c: &mut Criterion) {
    let u0 = data1_field(1000);
    let cfg = GodunovConfig::new(2.0, 0.65).unwrap();
    c.bench_function("godunov_run_data1_n1000", |b| b.iter(|| run(black_box(&u0), &cfg).unwrap()));
}

fn waves(c: &mut Criterion) {
    let mut group = c.benchmark_group("wave_solve");
    for n in [200, 1000] {
        let grid = PeriodicGrid::new(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, &grid| {
            b.iter(|| solve_from_cosine(grid, black_box(0.0255)).unwrap())
        });
    }
    group.finish();
    let profile = solve_from_cosine(PeriodicGrid::new(1000).unwrap(), 0.0255).unwrap();
    c.bench_function("wave_residual_n1000", |b| {
        b.iter(|| wave_residual(profile.c, black_box(&profile.v), profile.grid.h()))
    });
}

criterion_group!(benches, helmholtz, godunov_step, godunov_run, waves);
criterion_main!(benches);
