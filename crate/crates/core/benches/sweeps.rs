use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use kerrlaw::enz::{e4_enz_sweep, DrudeParams, EnzSpec};
use kerrlaw::exec::Execution;
use kerrlaw::fock::{aabb_system, rwa_sweep, FockMode};
use kerrlaw::photonic::{overlap_integral, FieldGrid};
use kerrlaw::sc::{snail_flux_sweep, SnailSpec};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn label(exec: Execution) -> &'static str {
    match exec {
        Execution::Sequential => "sequential",
        Execution::Parallel => "parallel",
    }
}

fn snail_sweep(c: &mut Criterion) {
    let spec = SnailSpec::new(3, 0.29, 6e9, 0.0).unwrap();
    let fluxes: Vec<f64> = (0..2000).map(|i| 0.5 * i as f64 / 1999.0).collect();
    let mut g = c.benchmark_group("snail_flux_sweep");
    for exec in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(exec)), &exec, |b, &exec| {
            b.iter(|| snail_flux_sweep(black_box(&spec), black_box(&fluxes), exec))
        });
    }
    g.finish();
}

fn grid_overlap(c: &mut Criterion) {
    let gauss = |w: f64| move |x: f64, y: f64, z: f64| (-(x * x + y * y + z * z) / (w * w)).exp();
    let a = FieldGrid::sample([96, 96, 96], [2.0, 2.0, 2.0], gauss(0.3)).unwrap();
    let b = FieldGrid::sample([96, 96, 96], [2.0, 2.0, 2.0], gauss(0.4)).unwrap();
    let mut g = c.benchmark_group("grid_overlap");
    for exec in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(exec)), &exec, |bch, &exec| {
            bch.iter(|| overlap_integral(black_box(&a), black_box(&b), exec).unwrap())
        });
    }
    g.finish();
}

fn lambda_sweep(c: &mut Criterion) {
    let modes = [
        FockMode { omega: 5.12e9, phi_zpf: 0.3 },
        FockMode { omega: 5.38e9, phi_zpf: 0.3 },
    ];
    let systems: Vec<_> = (0..8)
        .map(|i| aabb_system(modes, 1.0, 10f64.powf(-5.0 + 0.3 * i as f64), 10).unwrap())
        .collect();
    let mut g = c.benchmark_group("lambda_sweep");
    g.sample_size(10);
    for exec in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(exec)), &exec, |b, &exec| {
            b.iter(|| rwa_sweep(black_box(&systems), exec))
        });
    }
    g.finish();
}

fn enz_sweep(c: &mut Criterion) {
    let wp = 2.0e15;
    let spec = EnzSpec::new(DrudeParams::new(1.0, wp, 1e13).unwrap(), 1e-18, 1e-18).unwrap();
    let omegas: Vec<f64> = (1..=100_000).map(|i| wp * i as f64 / 50_000.0).collect();
    let mut g = c.benchmark_group("enz_sweep");
    for exec in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(exec)), &exec, |b, &exec| {
            b.iter(|| e4_enz_sweep(black_box(&spec), black_box(&omegas), exec))
        });
    }
    g.finish();
}

criterion_group!(benches, snail_sweep, grid_overlap, lambda_sweep, enz_sweep);
criterion_main!(benches);
