use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lgsel::{score_pool, score_pool_naive, top_k, Candidate, CandidatePool, LogitFrame, Method};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Size of the largest shared label pool we target.
const POOL_SIZE: usize = 94_739;
const VOCAB: usize = 32_000;

fn fixture() -> (LogitFrame, CandidatePool) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let frame = LogitFrame::new(0, (0..VOCAB).map(|_| rng.random_range(-10.0f32..10.0)).collect()).unwrap();
    let cands = (0..POOL_SIZE)
        .map(|i| {
            let len = rng.random_range(1..=8);
            let tokens = (0..len).map(|_| rng.random_range(0..VOCAB as u32)).collect();
            Candidate::new(format!("l{i}"), "", tokens)
        })
        .collect();
    (frame, CandidatePool::new(cands, "bench", true).unwrap())
}

fn scoring(c: &mut Criterion) {
    let (frame, pool) = fixture();
    let mut group = c.benchmark_group("score_pool");
    group.sample_size(20);
    for method in [Method::First, Method::Average, Method::Sum, Method::SampleAverage] {
        group.bench_with_input(BenchmarkId::new("parallel", method), &method, |b, &m| {
            b.iter(|| score_pool(black_box(&frame), &pool, m, false).unwrap())
        });
    }
    group.bench_function("naive/average", |b| {
        b.iter(|| score_pool_naive(black_box(&frame), &pool, Method::Average, false).unwrap())
    });
    group.finish();

    let scores = score_pool(&frame, &pool, Method::Average, false).unwrap();
    c.bench_function("top_k/20", |b| b.iter(|| top_k(black_box(&scores), &pool, 20).unwrap()));
    c.bench_function("average_plus_top_k/20", |b| {
        b.iter(|| {
            let s = score_pool(black_box(&frame), &pool, Method::Average, false).unwrap();
            top_k(&s, &pool, 20).unwrap()
        })
    });
}

criterion_group!(benches, scoring);
criterion_main!(benches);
