//! Sequential versus rayon execution of the four kernels on mid-size inputs.

use copro::kernels::{
    average_binning, cnn_ship_detect, fp_convolution, render_depth, BandPlan, Camera, CnnModel, ConvKernel, Executor,
    Pose6D, RgbImage, TriangleMesh, PATCH_SIZE,
};
use copro::{BitDepth, Frame};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

const EXECUTORS: [Executor; 2] = [Executor::Sequential, Executor::Parallel];

fn name(e: Executor) -> &'static str {
    match e {
        Executor::Sequential => "sequential",
        Executor::Parallel => "parallel",
    }
}

fn gray(side: usize) -> Frame {
    Frame::from_fn(side, side, BitDepth::Eight, |x, y| ((x * 31 + y * 17 + x * y) % 256) as u32).unwrap()
}

fn binning(c: &mut Criterion) {
    let f = gray(2048);
    let mut g = c.benchmark_group("binning_2048");
    g.throughput(Throughput::Elements(f.pixel_count() as u64));
    for e in EXECUTORS {
        let plan = BandPlan::static_36().with_executor(e);
        g.bench_with_input(BenchmarkId::from_parameter(name(e)), &plan, |b, plan| {
            b.iter(|| average_binning(black_box(&f), plan).unwrap())
        });
    }
    g.finish();
}

fn convolution(c: &mut Criterion) {
    let f = gray(512);
    let mut g = c.benchmark_group("convolution_512");
    g.sample_size(20);
    for k in [3, 7, 13] {
        let kernel = ConvKernel::box_filter(k).unwrap();
        for e in EXECUTORS {
            let plan = BandPlan::static_36().with_executor(e);
            g.bench_with_input(BenchmarkId::new(format!("k{k}"), name(e)), &plan, |b, plan| {
                b.iter(|| fp_convolution(black_box(&f), &kernel, plan).unwrap())
            });
        }
    }
    g.finish();
}

const CUBE: &str = include_str!("../../../fixtures/meshes/cube.off");

fn render(c: &mut Criterion) {
    let mesh = TriangleMesh::from_off(CUBE).unwrap();
    let cam = Camera {
        far: 20.0,
        ..Camera::square(512, 1280.0)
    };
    let pose = Pose6D::new([0.5, 0.5, -3.0], [0.0, 0.0, 0.3]).unwrap();
    let mut g = c.benchmark_group("render_512");
    g.sample_size(20);
    for e in EXECUTORS {
        let plan = BandPlan::dynamic(36).with_executor(e);
        g.bench_with_input(BenchmarkId::from_parameter(name(e)), &plan, |b, plan| {
            b.iter(|| render_depth(&mesh, black_box(&pose), &cam, plan).unwrap())
        });
    }
    g.finish();
}

fn cnn(c: &mut Criterion) {
    let model = CnnModel::seeded(7);
    let side = 2 * PATCH_SIZE;
    let data = (0..side * side)
        .map(|i| [(i * 7) as u16, (i * 13) as u16, (i * 31) as u16])
        .collect();
    let img = RgbImage::new(side, side, data).unwrap();
    let mut g = c.benchmark_group("cnn_4_patches");
    g.sample_size(10);
    for e in EXECUTORS {
        g.bench_with_input(BenchmarkId::from_parameter(name(e)), &e, |b, &e| {
            b.iter(|| cnn_ship_detect(black_box(&img), &model, e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, binning, convolution, render, cnn);
criterion_main!(benches);
