use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kness_core::kfun::k_functional;
use kness_core::optimize::{minimize_over_orbit, OptimizerConfig};
use kness_core::sample::{random_trace_free, rng_for};
use kness_core::{ComplexMatrix, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn batch_k(c: &mut Criterion) {
    let mut group = c.benchmark_group("batch_k");
    for n in [4usize, 8] {
        let mut rng = rng_for(1, n as u64);
        let batch: Vec<ComplexMatrix> = (0..4096).map(|_| random_trace_free(&mut rng, n)).collect();
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &batch, |b, batch| {
                b.iter(|| mode.map_slice(batch, |a| k_functional(a).ok().and_then(|r| r.k_value)))
            });
        }
    }
    group.finish();
}

fn restarts(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimizer_restarts");
    group.sample_size(10);
    let a = ComplexMatrix::real_diag(&[2.0, 0.0, -2.0]);
    for (name, mode) in MODES {
        let cfg = OptimizerConfig { restarts: 8, execution: mode, ..Default::default() };
        group.bench_function(name, |b| b.iter(|| minimize_over_orbit(black_box(&a), &cfg).unwrap().best_k));
    }
    group.finish();
}

criterion_group!(benches, batch_k, restarts);
criterion_main!(benches);
