use std::hint::black_box;

use collapse_bench::{canonical_bm, canonical_mm1, canonical_pareto};
use collapse_core::analytic::{bm_closed_form_lst, find_alpha_lambda};
use collapse_core::{CollapseLaw, StationarySolution};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn root(c: &mut Criterion) {
    let mut g = c.benchmark_group("alpha_lambda");
    for (name, model) in [("bm", canonical_bm()), ("mm1", canonical_mm1()), ("pareto", canonical_pareto())] {
        g.bench_function(name, |b| b.iter(|| find_alpha_lambda(black_box(&model), 1.0).unwrap()));
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    for (name, model) in [("bm", canonical_bm()), ("mm1", canonical_mm1()), ("pareto", canonical_pareto())] {
        g.bench_function(name, |b| {
            b.iter(|| StationarySolution::solve(black_box(&model), 1.0, CollapseLaw::Uniform01).unwrap())
        });
    }
    g.finish();
}

fn transform(c: &mut Criterion) {
    let mut g = c.benchmark_group("lst");
    for (name, model) in [("bm", canonical_bm()), ("pareto", canonical_pareto())] {
        let sol = StationarySolution::solve(&model, 1.0, CollapseLaw::Uniform01).unwrap();
        let al = sol.alpha_lambda();
        for (tag, a) in [("below", 0.5 * al), ("above", 3.0 * al)] {
            g.bench_with_input(BenchmarkId::new(name, tag), &a, |b, &a| b.iter(|| sol.lst(black_box(a)).unwrap()));
        }
    }
    for theta in [0.5, 2.0, 50.0] {
        let sol = StationarySolution::solve(&canonical_mm1(), 1.0, CollapseLaw::Beta1 { theta }).unwrap();
        g.bench_with_input(BenchmarkId::new("mm1_theta", theta), &theta, |b, _| {
            b.iter(|| sol.lst(black_box(0.7)).unwrap())
        });
    }
    g.bench_function("bm_closed_form", |b| {
        b.iter(|| bm_closed_form_lst(0.0, 2.0, 1.0, black_box(0.5)).unwrap())
    });
    g.finish();
}

fn moments(c: &mut Criterion) {
    let sol = StationarySolution::solve(&canonical_mm1(), 1.0, CollapseLaw::Uniform01).unwrap();
    c.bench_function("moments_8", |b| b.iter(|| sol.moments(black_box(8))));
}

criterion_group!(benches, root, solve, transform, moments);
criterion_main!(benches);
