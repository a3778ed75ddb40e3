//! Parallel versus sequential backends. Run once with default features and once
//! with `--no-default-features`; the benchmark ids carry the backend name so
//! criterion keeps both baselines side by side.

use criterion::{criterion_group, criterion_main, Criterion};
use secbeam::harness::{run_experiment, ExperimentSpec};
use secbeam::par;
use secbeam::rates::{eve_outage_mc, EveSide};
use secbeam::sca::{heuristic_start, RunOptions, Scheme};
use secbeam::scenario::{draw_channels, SystemConfig};
use std::hint::black_box;

fn backend() -> &'static str {
    if par::is_parallel() { "rayon" } else { "sequential" }
}

fn outage(c: &mut Criterion) {
    let cfg = SystemConfig::paper_defaults();
    let ch = draw_channels(&cfg, 1).unwrap();
    let design = heuristic_start(&ch, &cfg).unwrap().design;
    c.bench_function(&format!("eve_outage_mc_1e5/{}", backend()), |b| {
        b.iter(|| eve_outage_mc(black_box(&design), &cfg, 0.5, EveSide::Primary, 100_000, 7).unwrap())
    });
}

fn experiment(c: &mut Criterion) {
    let mut cfg = SystemConfig::paper_defaults()
        .with_antennas(4)
        .with_outage_targets(0.05, 0.01)
        .with_min_primary_secrecy(0.1);
    cfg.mc.outage_samples = 20_000;
    cfg.mc.worst_case_samples = 500;
    let mut spec = ExperimentSpec::cdf("bench.csv").keep_config_settings();
    spec.trials = 4;
    spec.schemes = vec![Scheme::NoJn];
    let mut group = c.benchmark_group("cdf_4_trials");
    group.sample_size(10);
    group.bench_function(backend(), |b| {
        b.iter(|| run_experiment(black_box(&spec), &cfg, &RunOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, outage, experiment);
criterion_main!(benches);
