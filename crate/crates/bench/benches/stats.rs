use criterion::{criterion_group, criterion_main, Criterion};
use verdict_core::harness::stats::{fisher_exact_two_sided, two_proportion_z};

fn bench_stats(c: &mut Criterion) {
    c.bench_function("fisher_exact_100_per_arm", |b| {
        b.iter(|| fisher_exact_two_sided(64, 100, 27, 100).unwrap())
    });
    c.bench_function("fisher_exact_10000_per_arm", |b| {
        b.iter(|| fisher_exact_two_sided(6400, 10000, 2700, 10000).unwrap())
    });
    c.bench_function("two_proportion_z", |b| {
        b.iter(|| two_proportion_z(64, 100, 27, 100).unwrap())
    });
}

criterion_group!(benches, bench_stats);
criterion_main!(benches);
