//! Sequential vs parallel execution of the data-parallel stages.
//!
//! Without the `parallel` feature both arms run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lom::generator::{generate, GenSpec};
use lom::geometry::coverage_sets_with;
use lom::model::{build_model_with, BuildOptions};
use lom::oracle::{solve_exact_with, SearchLimits};
use lom::scenario::precompute_pen_with;
use lom::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn base_case(c: &mut Criterion) {
    let scn = generate(&GenSpec::base_case(1)).unwrap();
    let pen = precompute_pen_with(&scn, Execution::Sequential).unwrap();
    let cov = coverage_sets_with(&scn, Execution::Sequential).unwrap();

    let mut g = c.benchmark_group("base_case");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("coverage", name), &exec, |b, &e| {
            b.iter(|| coverage_sets_with(&scn, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("penalties", name), &exec, |b, &e| {
            b.iter(|| precompute_pen_with(&scn, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("build_sparse", name), &exec, |b, &e| {
            b.iter(|| build_model_with(&scn, &pen, &cov, &BuildOptions::default(), e).unwrap())
        });
    }
    g.finish();
}

fn desk_oracle(c: &mut Criterion) {
    let scn = generate(&GenSpec::desk(3)).unwrap();
    let pen = precompute_pen_with(&scn, Execution::Sequential).unwrap();
    let cov = coverage_sets_with(&scn, Execution::Sequential).unwrap();
    let limits = SearchLimits::default();

    let mut g = c.benchmark_group("desk_oracle");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("solve_exact", name), &exec, |b, &e| {
            b.iter(|| solve_exact_with(&scn, &pen, &cov, &limits, e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, base_case, desk_oracle);
criterion_main!(benches);
