use std::hint::black_box;

use alphadyn::dynamics::{InitialField, SimConfig, Simulation, TimeScheme};
use alphadyn::eigen::eigenvalues;
use alphadyn::operator::{assemble, AlphaProfile, RadialGrid};
use alphadyn::spectral::{linspace, sweep, ScaledProfile, SweepOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigenvalues");
    g.sample_size(10);
    for n in [50usize, 100, 200] {
        let op = assemble(1, &AlphaProfile::kinematic(6.8), RadialGrid::new(n).unwrap()).unwrap();
        g.bench_with_input(BenchmarkId::new("kinematic", n), &op, |b, op| {
            b.iter(|| eigenvalues(black_box(op)).unwrap())
        });
    }
    g.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    let family = ScaledProfile::new(AlphaProfile::kinematic(6.78), 1, RadialGrid::new(100).unwrap());
    let params = linspace(0.0, 1.2, 13);
    g.bench_function("kinematic_n100_13_steps", |b| {
        b.iter(|| sweep(&family, black_box(&params), SweepOptions::default()).unwrap())
    });
    g.finish();
}

fn bench_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("time_step");
    for (name, scheme, dt) in [("imex", TimeScheme::Imex, 2e-4), ("ab3", TimeScheme::ExplicitAb3, 1e-5)] {
        let cfg = SimConfig {
            n: 100,
            c: 20.0,
            d: 6.0,
            dt,
            t_end: 1e6 * dt,
            scheme,
            initial: InitialField::Seed { amplitude: 1.0 },
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(cfg).unwrap();
        g.bench_function(BenchmarkId::new(name, 100), |b| b.iter(|| sim.step().unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_eigen, bench_sweep, bench_step);
criterion_main!(benches);
