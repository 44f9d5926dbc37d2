use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use roundness_core::cubical::{theta_classes_with, verify_isometry_with};
use roundness_core::{
    batch_roundness, free_group_ball, grid, halfspace_embedding, hypercube, lp_sample, search_violation,
    theta_classes, Exec, SearchOptions, Strategy,
};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn all_pairs_bfs(c: &mut Criterion) {
    let (graph, _) = free_group_ball(2, 6).unwrap();
    let mut group = c.benchmark_group("all_pairs_bfs/free2_r6");
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| graph.metric_with(exec).unwrap()));
    }
    group.finish();
}

fn exhaustive_search(c: &mut Criterion) {
    let space = lp_sample(3, 14, 1.5, 3).unwrap();
    let mut group = c.benchmark_group("exhaustive_search/lp14");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = SearchOptions { strategy: Strategy::Exhaustive, max_n: 3, exec, ..Default::default() };
        // A small exponent has no violation, so the whole space is enumerated.
        group.bench_function(name, |b| b.iter(|| search_violation(&space, 0.5, &opts).unwrap()));
    }
    group.finish();
}

fn random_search(c: &mut Criterion) {
    let space = lp_sample(4, 40, 1.2, 9).unwrap();
    let mut group = c.benchmark_group("random_search/lp40");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts =
            SearchOptions { strategy: Strategy::Random, budget: 200_000, max_n: 4, exec, ..Default::default() };
        group.bench_function(name, |b| b.iter(|| search_violation(&space, 0.5, &opts).unwrap()));
    }
    group.finish();
}

fn hyperplanes(c: &mut Criterion) {
    let (graph, space) = grid(&[8, 8, 6]).unwrap();
    let hps = theta_classes(&graph).unwrap();
    let emb = halfspace_embedding(&graph, &hps, 0).unwrap();
    let mut group = c.benchmark_group("cubical/grid8x8x6");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("theta_classes", name), &exec, |b, &exec| {
            b.iter(|| theta_classes_with(&graph, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("verify_isometry", name), &exec, |b, &exec| {
            b.iter(|| verify_isometry_with(&emb, &space, exec).unwrap())
        });
    }
    group.finish();
}

fn batch(c: &mut Criterion) {
    let spaces: Vec<_> = (1..=6).map(|n| hypercube(n).unwrap().1).collect();
    let mut group = c.benchmark_group("batch_roundness/hypercubes1_6");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| batch_roundness(&spaces, 1e-6, 8.0, exec)));
    }
    group.finish();
}

criterion_group!(benches, all_pairs_bfs, exhaustive_search, random_search, hyperplanes, batch);
criterion_main!(benches);
