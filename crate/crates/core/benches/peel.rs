//! Parallel vs sequential candidate evaluation across problem sizes, plus
//! the same comparison for isolation-forest fitting.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hullpeel::detector::{peel, peel_sequential, DetectorConfig};
use hullpeel::geometry::Point;
use hullpeel::iforest::{iforest_fit, ForestParams};

fn planted_gaussians(n: usize) -> Vec<Point> {
    let mut state = 0xfeed5eed ^ n as u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut points: Vec<Point> = (0..n.saturating_sub(2))
        .map(|_| {
            let u1 = next().max(1e-12);
            let u2 = next();
            let r = (-2.0 * u1.ln()).sqrt();
            Point::from([
                r * (std::f64::consts::TAU * u2).cos(),
                r * (std::f64::consts::TAU * u2).sin(),
            ])
        })
        .collect();
    points.push(Point::from([8.0, 8.0]));
    points.push(Point::from([-8.0, -8.0]));
    points
}

fn bench_peel(c: &mut Criterion) {
    let mut group = c.benchmark_group("peel-optimal-k8");
    for n in [100usize, 200, 400] {
        let points = planted_gaussians(n);
        let config = DetectorConfig::optimal(8);
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| peel(&points, &config).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| peel_sequential(&points, &config).unwrap())
        });
    }
    group.finish();
}

fn bench_iforest(c: &mut Criterion) {
    let mut group = c.benchmark_group("iforest-fit");
    let points = planted_gaussians(1000);
    let params = ForestParams::default();
    group.bench_function("parallel", |b| {
        b.iter(|| iforest_fit(&points, &params).unwrap())
    });
    group.bench_function("sequential", |b| {
        std::env::set_var("HULLPEEL_THREADS", "1");
        b.iter(|| iforest_fit(&points, &params).unwrap());
        std::env::remove_var("HULLPEEL_THREADS");
    });
    group.finish();
}

criterion_group!(benches, bench_peel, bench_iforest);
criterion_main!(benches);
