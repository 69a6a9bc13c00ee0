use std::hint::black_box;

use asymsens::{
    asm_select, build_variance_estimator, ism_sample, linsep_bounds, variance_lower_bounds, ExtendedReal,
    NoiseSource, PerItemLosses, VarianceConfig,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand_distr::{Distribution, LogNormal};

fn lognormal(n: usize) -> Vec<f64> {
    let mut rng = NoiseSource::new(42);
    let dist = LogNormal::new(0.0, 1.0).unwrap();
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

fn variance_bounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("variance_lower_bounds");
    for n in [100_000, 200_000, 400_000, 800_000] {
        let data = lognormal(n);
        let config = VarianceConfig::default();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &data, |b, data| {
            b.iter(|| variance_lower_bounds(black_box(data), &config).unwrap())
        });
    }
    group.finish();
}

fn variance_pipeline(c: &mut Criterion) {
    let data = lognormal(1_000_000);
    let config = VarianceConfig { range: Some((0.0, 50.0)), ..Default::default() };
    let clipped: Vec<f64> = data.iter().map(|v| v.min(50.0)).collect();
    c.bench_function("variance_estimator_asm_1e6", |b| {
        let mut rng = NoiseSource::new(1);
        b.iter(|| {
            let est = build_variance_estimator(black_box(&clipped), &config, 0.5).unwrap();
            est.asm(&mut rng).unwrap()
        })
    });
}

fn mechanisms(c: &mut Criterion) {
    let data = lognormal(10_000);
    let config = VarianceConfig { range: Some((0.0, 50.0)), ..Default::default() };
    let clipped: Vec<f64> = data.iter().map(|v| v.min(50.0)).collect();
    let est = build_variance_estimator(&clipped, &config, 1.0).unwrap();
    let mut rng = NoiseSource::new(2);
    c.bench_function("asm_select_n1e4", |b| {
        b.iter(|| asm_select(&est.bounds, &est.grid, &est.budget, &mut rng).unwrap())
    });
    c.bench_function("ism_sample_n1e4", |b| b.iter(|| ism_sample(&est.bounds, 1.0, &mut rng).unwrap()));

    let losses = PerItemLosses::new(data.iter().map(|v| v.min(20.0)).collect(), 0.0, ExtendedReal::new(20.0).unwrap(), 1.0)
        .unwrap();
    c.bench_function("linsep_bounds_n1e4", |b| b.iter(|| linsep_bounds(black_box(&losses), 100).unwrap()));
}

criterion_group!(benches, variance_bounds, variance_pipeline, mechanisms);
criterion_main!(benches);
