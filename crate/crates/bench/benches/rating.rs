//! Rating kernels: sequential Elo and permutation resampling.
//!
//! Run: `cargo bench -p evalarena-bench --bench rating`

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use evalarena::{elo_permuted, elo_sequential, EloConfig};
use evalarena_bench::planted_votes;

fn bench_sequential(c: &mut Criterion) {
    let mut group = c.benchmark_group("elo/sequential");
    for n in [500, 5_000, 50_000] {
        let (votes, models) = planted_votes(n, 1);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &votes, |b, votes| {
            b.iter(|| black_box(elo_sequential(votes, &models, &EloConfig::default()).unwrap()));
        });
    }
    group.finish();
}

fn bench_permuted(c: &mut Criterion) {
    let mut group = c.benchmark_group("elo/permuted");
    group.sample_size(10);
    let (votes, models) = planted_votes(500, 2);
    for permutations in [200, 1000] {
        let cfg = EloConfig {
            permutations,
            ..EloConfig::default()
        };
        group.throughput(Throughput::Elements((permutations * votes.len()) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(permutations), &cfg, |b, cfg| {
            b.iter(|| black_box(elo_permuted(&votes, &models, cfg).unwrap()));
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sequential, bench_permuted);
criterion_main!(benches);
