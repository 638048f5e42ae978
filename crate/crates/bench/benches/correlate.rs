use std::hint::black_box;
use std::time::Duration;

use bohr_chowla::correlator::correlate;
use bohr_chowla_bench::two_point;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn two_point_correlation(c: &mut Criterion) {
    let mut group = c.benchmark_group("correlate_two_point");
    group.sample_size(10).measurement_time(Duration::from_secs(10));
    for x in [100_000u64, 1_000_000] {
        let spec = two_point(x);
        group.throughput(Throughput::Elements(x));
        group.bench_with_input(BenchmarkId::from_parameter(x), &spec, |b, spec| b.iter(|| black_box(correlate(spec).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, two_point_correlation);
criterion_main!(benches);
