use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use girthcut_core::numerics::PrecisionContext;
use girthcut_core::recurrence::{init_round, solve, step, NullSink, RuleScalars, SolveOptions};
use girthcut_core::schedule::PaperParams;

fn single_step(c: &mut Criterion) {
    let params = PaperParams::paper_defaults();
    let schedule = params.build();
    let mut group = c.benchmark_group("step");
    for bits in [53, 256, 512] {
        let ctx = PrecisionContext::new(bits).unwrap();
        let rules = RuleScalars::new(&params.phase_rules(true), ctx);
        let st = init_round(&schedule, ctx).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(bits), &st, |b, st| {
            b.iter(|| step(st, &rules).unwrap())
        });
    }
    group.finish();
}

fn solve_prefix(c: &mut Criterion) {
    let schedule = PaperParams::paper_defaults().build().truncated(2000);
    let mut group = c.benchmark_group("solve_2000_rounds");
    group.sample_size(10);
    for bits in [53, 256] {
        let ctx = PrecisionContext::new(bits).unwrap();
        group.bench_function(BenchmarkId::from_parameter(bits), |b| {
            b.iter(|| solve(&schedule, ctx, &SolveOptions::every(0), &mut NullSink).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single_step, solve_prefix);
criterion_main!(benches);
