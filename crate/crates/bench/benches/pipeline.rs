use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shiftdens_core::density::{bandwidth_lscv, geomspace, Kernel};
use shiftdens_core::estimation::{estimate_shifts_panel, EstimatorConfig, ShiftEstimator, TauGrid};
use shiftdens_core::signal::{generate_curve, generate_panel, ShiftDistribution, Signal, TimeGrid};
use shiftdens_core::spectral::empirical_spectrum;

fn noisy_row(n: usize) -> Vec<f64> {
    generate_curve(&Signal::half_sine(), 0.05, 0.25, TimeGrid::new(n).unwrap(), 7, 0)
}

fn spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectrum");
    for n in [100, 800, 4096] {
        let row = noisy_row(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &row, |b, row| {
            b.iter(|| empirical_spectrum(black_box(row), (n - 1) / 2, true).unwrap())
        });
    }
    group.finish();
}

fn single_curve(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_curve");
    for n in [100, 800] {
        let est = ShiftEstimator::new(EstimatorConfig::new(TauGrid::symmetric(0.25, 100).unwrap()), n).unwrap();
        let row = noisy_row(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &row, |b, row| {
            b.iter(|| est.estimate(black_box(row)).unwrap())
        });
    }
    group.finish();
}

fn panel(c: &mut Criterion) {
    let panel = generate_panel(&Signal::half_sine(), &ShiftDistribution::bimodal_preset(), 0.25, 100, 50, 3).unwrap();
    let cfg = EstimatorConfig::new(TauGrid::symmetric(0.25, 100).unwrap());
    c.bench_function("estimate_panel_100x50", |b| b.iter(|| estimate_shifts_panel(black_box(&panel), &cfg).unwrap()));
}

fn lscv(c: &mut Criterion) {
    let points: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.618_034).fract() * 0.4 - 0.2).collect();
    let grid = geomspace(0.01, 0.25, 40);
    let mut group = c.benchmark_group("lscv_200_points");
    for kernel in [Kernel::gaussian(), Kernel::epanechnikov()] {
        group.bench_function(kernel.id().to_string(), |b| {
            b.iter(|| bandwidth_lscv(black_box(&points), &kernel, &grid).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, spectrum, single_curve, panel, lscv);
criterion_main!(benches);
