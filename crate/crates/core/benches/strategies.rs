use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use whlab_core::cluster::{self, KMeansConfig};
use whlab_core::datagen::{self, CorpusKind, GenConfig};
use whlab_core::{graph, stats, Engine, Exec, Strategy, Word};

fn modes() -> Vec<(&'static str, Exec)> {
    let mut m = vec![("sequential", Exec::Sequential)];
    if cfg!(feature = "parallel") {
        m.push(("parallel", Exec::Parallel));
    }
    m
}

fn corpus(kind: CorpusKind, cfg: &GenConfig, count: usize) -> Vec<Word> {
    datagen::generate_corpus(cfg, kind, count, Exec::default()).unwrap().words().unwrap()
}

fn strategy_benchmark(c: &mut Criterion) {
    let rank = 3;
    let engine = Engine::new(rank);
    let train = corpus(CorpusKind::C1, &GenConfig::new(rank, 50, 300, 11), 500);
    let model = Arc::new(cluster::estimate_lambda_centers(&engine, &train, Exec::default()).unwrap());
    let prims = corpus(CorpusKind::Primitive, &GenConfig::new(rank, 100, 500, 12).with_chain(15, 40), 100);
    let strategies = [
        Strategy::Random { seed: 1 },
        Strategy::NielsenFirst,
        Strategy::Centroid(model),
        Strategy::MaxWeight,
    ];

    let mut group = c.benchmark_group("reduce_primitives_f3");
    group.sample_size(10);
    for s in &strategies {
        for (name, exec) in modes() {
            group.bench_with_input(BenchmarkId::new(s.label(), name), &exec, |b, &exec| {
                b.iter(|| stats::run_strategy_benchmark(&engine, &prims, std::slice::from_ref(s), exec, false).unwrap())
            });
        }
    }
    group.finish();
}

fn generation(c: &mut Criterion) {
    let cfg = GenConfig::new(3, 50, 300, 21);
    let mut group = c.benchmark_group("generate_c1_f3");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| datagen::generate_corpus(&cfg, CorpusKind::C1, 200, exec).unwrap())
        });
    }
    group.finish();
}

fn clustering(c: &mut Criterion) {
    let words = corpus(CorpusKind::C1, &GenConfig::new(3, 50, 300, 31), 1000);
    let features: Vec<Vec<f64>> = words.iter().map(|w| graph::feature_vector(w).unwrap().0).collect();
    let engine = Engine::new(3);
    let mut group = c.benchmark_group("clustering_f3");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::new("kmeans", name), &exec, |b, &exec| {
            b.iter(|| cluster::kmeans(&features, &KMeansConfig::new(24, 1), exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("lambda", name), &exec, |b, &exec| {
            b.iter(|| cluster::estimate_lambda_centers(&engine, &words, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, strategy_benchmark, generation, clustering);
criterion_main!(benches);
