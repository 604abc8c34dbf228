use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use vmsdta::daytoday::{run_day_to_day, solve_eta, SolverConfig};
use vmsdta::dnl::run_dnl;
use vmsdta_bench::fig1_day_one;

fn loading(c: &mut Criterion) {
    let (scenario, profile, rates) = fig1_day_one();
    c.bench_function("run_dnl fig1", |b| b.iter(|| run_dnl(black_box(&scenario), &profile, &rates).unwrap()));
}

fn eta(c: &mut Criterion) {
    let n = 3600;
    let h: Vec<Vec<f64>> = (0..3).map(|p| (0..n).map(|k| ((k * (p + 3)) % 7) as f64 * 0.05).collect()).collect();
    let phi: Vec<Vec<f64>> =
        (0..3).map(|p| (0..n).map(|k| 600.0 + ((k * 31 + p * 17) % 400) as f64).collect()).collect();
    let rows: Vec<&[f64]> = h.iter().map(Vec::as_slice).collect();
    let prow: Vec<&[f64]> = phi.iter().map(Vec::as_slice).collect();
    let cfg = SolverConfig::default();
    c.bench_function("solve_eta 3x3600", |b| b.iter(|| solve_eta(black_box(&rows), &prow, 1e-3, 500.0, 1.0, &cfg)));
}

fn days(c: &mut Criterion) {
    let (mut scenario, _, _) = fig1_day_one();
    scenario.config.solver.max_days = 20;
    scenario.config.solver.gap_tolerance = 1e-12;
    let mut group = c.benchmark_group("day-to-day");
    group.sample_size(10);
    group.bench_function("fig1 20 days", |b| b.iter(|| run_day_to_day(black_box(&scenario), None).unwrap()));
    group.finish();
}

criterion_group!(benches, loading, eta, days);
criterion_main!(benches);
