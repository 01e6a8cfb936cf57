use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use scdf::montecarlo::{MonteCarlo, SepEstimator};
use scdf::parallel::ExecMode;
use scdf::SystemConfig;

const SAMPLES: u64 = 1 << 18;

fn modes() -> [(&'static str, ExecMode); 2] {
    [("parallel", ExecMode::Parallel), ("sequential", ExecMode::Sequential)]
}

fn outage(c: &mut Criterion) {
    let cfg = SystemConfig::symmetric_preset().at_snr_db(10.0);
    let mut group = c.benchmark_group("outage");
    group.sample_size(10);
    for (name, mode) in modes() {
        let mc = MonteCarlo::new(mode);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| mc.outage(black_box(&cfg), SAMPLES, 7).unwrap())
        });
    }
    group.finish();
}

fn sep(c: &mut Criterion) {
    let cfg = SystemConfig::symmetric_preset().at_snr_db(10.0);
    let mut group = c.benchmark_group("sep_conditional");
    group.sample_size(10);
    for (name, mode) in modes() {
        let mc = MonteCarlo::new(mode);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| mc.sep(black_box(&cfg), SAMPLES, 7, SepEstimator::Conditional).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, outage, sep);
criterion_main!(benches);
