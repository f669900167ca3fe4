use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use girthcut_core::mc_sim::{count_short_cycles, gen_cubic, run_with, Engine, SimOptions};
use girthcut_core::schedule::{parse_file, Schedule};

fn fast_schedule() -> Schedule {
    let text = include_str!("../../core/fixtures/fast.cfg");
    parse_file(text).unwrap().schedule()
}

fn generate(c: &mut Criterion) {
    let mut group = c.benchmark_group("gen_cubic");
    group.sample_size(10);
    for n in [10_000u64, 100_000] {
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| gen_cubic(n, 1).unwrap())
        });
    }
    group.finish();
}

fn procedure(c: &mut Criterion) {
    let schedule = fast_schedule();
    let g = gen_cubic(100_000, 3).unwrap();
    let mut group = c.benchmark_group("run_procedure_fast_100k");
    group.sample_size(10);
    for engine in [Engine::Event, Engine::Sync] {
        let opts = SimOptions {
            engine,
            check_invariants: false,
        };
        group.bench_function(format!("{engine:?}").to_lowercase(), |b| {
            b.iter(|| run_with(&g, &schedule, 5, opts).unwrap())
        });
    }
    group.finish();
}

fn short_cycles(c: &mut Criterion) {
    let g = gen_cubic(100_000, 4).unwrap();
    c.bench_function("count_short_cycles_100k_l10", |b| {
        b.iter(|| count_short_cycles(&g, 10))
    });
}

criterion_group!(benches, generate, procedure, short_cycles);
criterion_main!(benches);
