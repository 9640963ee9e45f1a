use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use charsum_core::arith::{sieve_primes, smoothness_sieve, FundamentalDiscriminant};
use charsum_core::charsum::{fill_char_values, profile_with};
use charsum_core::exec::Execution;
use charsum_core::polya::{s_yz_max, MEMBERSHIP_SLACK};
use charsum_core::verify::{scan, Config};

fn large_d() -> FundamentalDiscriminant {
    (99_000..100_000)
        .rev()
        .find_map(|a: i64| FundamentalDiscriminant::new(-a).ok())
        .unwrap()
}

fn bench_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    for x in [2_000u64, 5_000] {
        let config = Config {
            grid: 1 << 12,
            ..Config::new(x)
        };
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(name, x), &config, |b, cfg| {
                b.iter(|| scan(black_box(cfg), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_kernels(c: &mut Criterion) {
    let d = large_d();
    let sieve = sieve_primes(50_000).unwrap();
    let lpf = smoothness_sieve(1_000).unwrap();
    let mut buf = Vec::new();
    c.bench_function("char_values_half_range", |b| {
        b.iter(|| fill_char_values(d, d.modulus() / 2, &sieve, &mut buf).unwrap())
    });
    c.bench_function("profile", |b| {
        b.iter(|| profile_with(d, &sieve, &mut buf).unwrap())
    });
    c.bench_function("s_yz_max", |b| {
        b.iter(|| s_yz_max(d, 4f64.exp(), 608.0, 1 << 16, MEMBERSHIP_SLACK, &lpf).unwrap())
    });
}

criterion_group!(benches, bench_scan, bench_kernels);
criterion_main!(benches);
