use std::hint::black_box;

use bispectral_core::ba::{construct, Budget};
use bispectral_core::config::{Config, Params};
use bispectral_core::numeric::ComplexParams;
use bispectral_core::series::{solve_recurrence, solve_recurrence_numeric};
use bispectral_core::Rat;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64 as C;

fn bench_construct(c: &mut Criterion) {
    let mut group = c.benchmark_group("construct");
    for (l, k, p, r) in [(1, 1, 0, 0), (1, 3, 0, 0), (1, 1, 1, 0)] {
        let cfg = Config::build(Params::new(l, Rat::from_int(k), p, r)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{l},{k},{p},{r}")), &cfg, |b, cfg| {
            b.iter(|| construct(black_box(cfg), &Budget::default()).unwrap())
        });
    }
    group.finish();
}

fn bench_recurrence(c: &mut Criterion) {
    let cfg = Config::build(Params::new(1, Rat::ONE, 1, 0)).unwrap();
    c.bench_function("recurrence/exact/height4", |b| b.iter(|| solve_recurrence(black_box(&cfg), 4).unwrap()));

    let cp = ComplexParams::new(1, C::new(1.5, 0.2), C::new(0.7, 0.0), C::new(0.3, 0.0)).unwrap();
    let z = [C::new(0.3, 1.7), C::new(-0.4, 2.9)];
    let mut group = c.benchmark_group("recurrence/numeric");
    for h in [4, 8, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(h), &h, |b, &h| {
            b.iter(|| solve_recurrence_numeric(black_box(&cp), h, &z).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_construct, bench_recurrence);
criterion_main!(benches);
