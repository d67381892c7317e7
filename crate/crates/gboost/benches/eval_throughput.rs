//! Compares sequential task evaluation against the rayon-parallel path.
//!
//! Run with `cargo bench` (the `parallel` feature is on by default); the
//! sequential path is always compiled, so the comparison runs in one build.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use gboost::backends::synthetic::{synthetic_triple, SyntheticProfile, SYNTH_STEP_LEN};
use gboost::core::SearchConfig;
use gboost::harness::benchmark::evaluate_tasks_seq;
use gboost::harness::{generate_tasks, oracle_prm_for};

fn bench_config() -> SearchConfig {
    SearchConfig {
        step_length: SYNTH_STEP_LEN,
        max_depth: 3,
        max_iterations: 32,
        expansion_budget: 2,
        deterministic_top1: true,
        ..SearchConfig::default()
    }
}

fn eval_throughput(c: &mut Criterion) {
    let seed = 99;
    let profile = SyntheticProfile::Complementary;
    let backends = synthetic_triple(seed, profile);
    let tasks = generate_tasks(seed, 32, profile);
    let prm = oracle_prm_for(&tasks);
    let config = bench_config();

    let mut group = c.benchmark_group("evaluate_32_tasks");
    group.sample_size(10);

    group.bench_function("sequential", |b| {
        b.iter_batched(
            || (),
            |_| evaluate_tasks_seq(&tasks, &backends, &prm, &config),
            BatchSize::PerIteration,
        )
    });

    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        use gboost::harness::benchmark::evaluate_tasks_par;
        b.iter_batched(
            || (),
            |_| evaluate_tasks_par(&tasks, &backends, &prm, &config),
            BatchSize::PerIteration,
        )
    });

    group.finish();
}

criterion_group!(benches, eval_throughput);
criterion_main!(benches);
