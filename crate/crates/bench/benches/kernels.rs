use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use ergostab_bench::toy_task;
use ergostab_core::ergodic::{autocorrelation, bifurcation_scan, lyapunov_1d, ScanSettings};
use ergostab_core::landscapes::{LinearizedModel, QuadraticMapLoss};
use ergostab_core::markov::{spectral_gap, ulam_transition, LossPartition};
use ergostab_core::{draw_batch, run_orbit, Landscape, Observable, OptimizerConfig, RngStream, Schedule, WeightVector};

fn batches(c: &mut Criterion) {
    let mut rng = RngStream::new(0, 0);
    c.bench_function("draw_batch n=64 m=8", |b| b.iter(|| draw_batch(64, 8, black_box(&mut rng)).unwrap()));
}

fn toynet(c: &mut Criterion) {
    let (ds, net) = toy_task(0.25);
    let w = net.initial_weights(&mut RngStream::new(1, 0));
    let mut g = vec![0.0; net.dim()];
    c.bench_function("toynet grad", |b| b.iter(|| net.grad(black_box(&ds.samples[0]), black_box(&w), &mut g)));

    let config = OptimizerConfig::sgd(0.05, 8).with_momentum(0.9);
    let schedule = Schedule::new(0, 1000);
    c.bench_function("toynet sgd orbit 1000 steps", |b| {
        b.iter_batched(
            || RngStream::new(2, 0),
            |mut rng| {
                run_orbit(&WeightVector(w.clone()), &net, &ds.samples, &config, &schedule, &[Observable::TrainLoss], &mut rng)
                    .unwrap()
            },
            BatchSize::SmallInput,
        )
    });
}

fn ergodic(c: &mut Criterion) {
    let loss = QuadraticMapLoss::new(4.0).unwrap();
    c.bench_function("lyapunov g4 1e5", |b| {
        b.iter(|| lyapunov_1d(|w| loss.g_prime(w), 0.3, |w| loss.g(w), 100_000, 100, false).unwrap())
    });
    let s1 = QuadraticMapLoss::new(1.0).unwrap();
    let settings = ScanSettings {
        n_inits: 10,
        ..ScanSettings::default()
    };
    c.bench_function("bifurcation 8 etas x 10 inits", |b| {
        b.iter(|| bifurcation_scan(&s1, &[2.8, 2.9, 3.0, 3.1, 3.3, 3.4, 3.5, 3.6], &settings, 0).unwrap())
    });
    let series: Vec<f64> = (0..10_000).map(|t| 1.0 + (t as f64 * 0.37).sin().abs()).collect();
    c.bench_function("autocorrelation T=1e4 tau=50", |b| b.iter(|| autocorrelation(black_box(&series), 0, 50).unwrap()));
}

fn markov(c: &mut Criterion) {
    let series: Vec<f64> = (0..100_000).map(|t| ((t as f64 * 0.618).fract() + (t as f64 * 0.01).sin()).abs()).collect();
    let part = LossPartition::from_values(&series, 64, 0.05).unwrap();
    c.bench_function("ulam 64 bins 1e5 steps", |b| b.iter(|| ulam_transition(black_box(&series), 0, &part, 0.0).unwrap()));
    let tm = ulam_transition(&series, 0, &part, 0.0).unwrap().restricted_to_visited();
    c.bench_function("spectral gap 64 states", |b| b.iter(|| spectral_gap(black_box(&tm)).unwrap()));
}

fn ntk(c: &mut Criterion) {
    let model = LinearizedModel::random(10, 50, 0.005, 3).unwrap();
    c.bench_function("ntk fixed point n=10 d=50", |b| b.iter(|| model.ntk_fixed_point().unwrap()));
}

criterion_group!(benches, batches, toynet, ergodic, markov, ntk);
criterion_main!(benches);
