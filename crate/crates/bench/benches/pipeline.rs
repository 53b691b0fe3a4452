use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use voxent_bench::{layered_volume, noise_volume, standardized_values};
use voxent_core::attributes::{compute_attribute_table, AttributeKind};
use voxent_core::entropy::{discrete_entropy, kde_entropy, KdeConfig};
use voxent_core::glcm::{extract_slice, glcm, glcm_features, quantize, GlcmAngle, SliceView};
use voxent_core::partition::plan_subcubes;

fn bench_attributes(c: &mut Criterion) {
    let volume = noise_volume(64, 1);
    let grid = plan_subcubes(volume.dims(), 5).unwrap();
    let voxels = grid.total_subcubes() * grid.voxels_per_subcube();

    let mut group = c.benchmark_group("attribute_table_64c_d5");
    group.throughput(Throughput::Elements(voxels as u64));
    for kind in [AttributeKind::Mean, AttributeKind::StdDev, AttributeKind::Kurtosis] {
        group.bench_function(kind.name(), |b| {
            b.iter(|| {
                compute_attribute_table("bench", black_box(&volume), &grid, kind, 5).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_kde_entropy(c: &mut Criterion) {
    let cfg = KdeConfig::default();
    let mut group = c.benchmark_group("kde_entropy");
    // Typical per-image subcube counts: 125 for d = 5 on a near-cubic VOI,
    // a few thousand for elongated volumes.
    for n in [125usize, 1_000, 4_200] {
        let values = standardized_values(n, n as u64);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &values, |b, values| {
            b.iter(|| kde_entropy(black_box(values), &cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_discrete_entropy(c: &mut Criterion) {
    let values: Vec<f64> = (0..4_200).map(|i| (i % 16) as f64).collect();
    c.bench_function("discrete_entropy_4200", |b| {
        b.iter(|| discrete_entropy(black_box(&values)).unwrap())
    });
}

fn bench_glcm(c: &mut Criterion) {
    let volume = layered_volume(128, 3);
    let slice = extract_slice(&volume, SliceView::Xz, 64).unwrap();
    let quantized = quantize(&slice, 256).unwrap();

    let mut group = c.benchmark_group("glcm_128x128");
    group.throughput(Throughput::Elements((slice.width * slice.height) as u64));
    group.bench_function("quantize", |b| {
        b.iter(|| quantize(black_box(&slice), 256).unwrap())
    });
    group.bench_function("matrix_and_features", |b| {
        b.iter(|| {
            let m = glcm(black_box(&quantized), 1, GlcmAngle::Deg0, true).unwrap();
            glcm_features(&m)
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_attributes,
    bench_kde_entropy,
    bench_discrete_entropy,
    bench_glcm
);
criterion_main!(benches);
