use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use storyline_bench::{corpus, permutation};
use storyline_core::crossings::crossings_between;
use storyline_core::heuristics::{greedy_baseline, improve};
use storyline_core::models::{build_model, Formulation, ModelOptions};
use storyline_core::solver::{solve_exact, SolveOptions};

fn inversions(c: &mut Criterion) {
    let mut group = c.benchmark_group("crossings_between");
    for n in [100, 1_000, 10_000] {
        let pi = permutation(n, 1);
        let rho = permutation(n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| crossings_between(black_box(&pi), black_box(&rho)).unwrap())
        });
    }
    group.finish();
}

fn model_build(c: &mut Criterion) {
    let inst = &corpus(12, 30, 1)[0];
    let mut group = c.benchmark_group("build_model");
    for f in [Formulation::Lin, Formulation::Qdr, Formulation::Plo] {
        group.bench_function(f.name(), |b| {
            b.iter(|| build_model(black_box(inst), f, &ModelOptions { sbc: true, fixed: Vec::new() }))
        });
    }
    group.finish();
}

fn heuristics(c: &mut Criterion) {
    let insts = corpus(10, 20, 8);
    c.bench_function("greedy_then_improve", |b| {
        b.iter(|| {
            for inst in &insts {
                black_box(improve(inst, &greedy_baseline(inst)));
            }
        })
    });
}

fn exact(c: &mut Criterion) {
    let insts = corpus(6, 8, 4);
    let mut group = c.benchmark_group("solve_exact");
    group.sample_size(10);
    for f in [Formulation::Lin, Formulation::Plo] {
        group.bench_function(f.name(), |b| {
            b.iter(|| {
                for inst in &insts {
                    black_box(solve_exact(inst, f, &SolveOptions::default()).unwrap());
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, inversions, model_build, heuristics, exact);
criterion_main!(benches);
