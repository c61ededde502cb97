//! Closed-form timing versus the event simulation, and a parameter sweep
//! fanned out sequentially or over rayon.

use copro::kernels::Executor;
use copro::pipeline::{metrics, simulate_stream, ComponentTimes, Mode};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use std::time::Duration;

fn random_times(n: usize) -> Vec<ComponentTimes> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ms = || Duration::from_micros(rng.gen_range(0..300_000));
    (0..n)
        .map(|_| ComponentTimes {
            cif: ms(),
            vpu: ms() + Duration::from_micros(1),
            lcd: ms(),
            cif_buffer: ms(),
            lcd_buffer: ms(),
        })
        .collect()
}

fn formula_vs_simulation(c: &mut Criterion) {
    let t = ComponentTimes::from_ms(85.0, 3.0, 21.0, 168.0, 42.0);
    let mut g = c.benchmark_group("single_config");
    for mode in Mode::ALL {
        g.bench_function(BenchmarkId::new("formula", mode), |b| b.iter(|| metrics(black_box(&t), mode).unwrap()));
        g.bench_function(BenchmarkId::new("simulation_8_frames", mode), |b| {
            b.iter(|| simulate_stream(black_box(&t), mode, 8).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let configs = random_times(1000);
    let mut g = c.benchmark_group("sweep_1000");
    g.sample_size(10);
    for (label, e) in [("sequential", Executor::Sequential), ("parallel", Executor::Parallel)] {
        g.bench_function(label, |b| {
            b.iter(|| {
                e.map(&configs, |t| {
                    let s = simulate_stream(t, Mode::Masked, 5).unwrap();
                    s.period == metrics(t, Mode::Masked).unwrap().period
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, formula_vs_simulation, sweep);
criterion_main!(benches);
