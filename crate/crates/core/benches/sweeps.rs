use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ising_qoc::dynamics::ControlProtocol;
use ising_qoc::experiments::{optimize_points, protocol_sweep, ExperimentConfig};
use ising_qoc::sweep::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn quench_sweep(c: &mut Criterion) {
    let cfg = ExperimentConfig {
        n_spins: 5,
        ..ExperimentConfig::default()
    };
    let mut group = c.benchmark_group("quench_sweep_n5");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| protocol_sweep(&cfg, mode, ControlProtocol::sudden_quench).unwrap())
        });
    }
    group.finish();
}

fn ramp_sweep(c: &mut Criterion) {
    let cfg = ExperimentConfig {
        n_spins: 4,
        f0_start: 0.5,
        f0_stop: 1.5,
        f0_step: 0.1,
        duration: PI / 4.0,
        ..ExperimentConfig::default()
    };
    let mut group = c.benchmark_group("ramp_sweep_n4");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| protocol_sweep(&cfg, mode, ControlProtocol::linear_ramp).unwrap())
        });
    }
    group.finish();
}

fn short_optimize_sweep(c: &mut Criterion) {
    let cfg = ExperimentConfig {
        n_spins: 4,
        f0_start: 0.8,
        f0_stop: 1.1,
        f0_step: 0.1,
        duration: PI / 4.0,
        n_steps: Some(200),
        max_superiterations: 1,
        max_evaluations: Some(40),
        eta_error: 1e-12,
        ..ExperimentConfig::default()
    };
    let mut group = c.benchmark_group("optimize_sweep_n4");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| optimize_points(&cfg, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, quench_sweep, ramp_sweep, short_optimize_sweep);
criterion_main!(benches);
