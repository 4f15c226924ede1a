//! Desk-scale timings for the hot paths: EM, Lloyd iterations, kernel
//! matrix assembly, the eigensolver, DBSCAN, and mean shift. Iteration
//! caps are fixed and tolerances zeroed where early convergence would
//! otherwise make runs incomparable.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use unicluster_core::datagen;
use unicluster_core::density::{self, DbscanParams};
use unicluster_core::gmm::{self, InitStrategy};
use unicluster_core::graph;
use unicluster_core::kernels::{self, KernelSpec};
use unicluster_core::kmeans::{self, KmeansInit};
use unicluster_core::linalg::{sym_eig, SymMatrix};
use unicluster_core::rng::rng_stream;
use unicluster_core::{Dataset, RunConfig};

fn blobs3(n: usize, spread: f64, seed: u64) -> Dataset {
    let means = vec![vec![0.0, 0.0], vec![6.0, 0.0], vec![0.0, 6.0]];
    let cov = SymMatrix::from_rows(&[vec![spread, 0.0], vec![0.0, spread]]).expect("covariance");
    let covs = vec![cov; 3];
    let mut rng = rng_stream(seed);
    datagen::blobs(n, &means, &covs, &[1.0 / 3.0; 3], &mut rng).expect("blobs")
}

fn bench_em(c: &mut Criterion) {
    let data = blobs3(300, 0.5, 1);
    let cfg = RunConfig {
        seed: 2,
        max_iters: 5,
        tol: 0.0,
    };
    c.bench_function("gmm_em_5_iters_n300_k3", |b| {
        b.iter(|| gmm::fit_em(black_box(&data), 3, &cfg, &InitStrategy::RandomPoints).unwrap())
    });
}

fn bench_kmeans(c: &mut Criterion) {
    let data = blobs3(1000, 0.5, 3);
    let cfg = RunConfig::with_seed(4);
    c.bench_function("kmeans_fit_n1000_k3", |b| {
        b.iter(|| kmeans::fit(black_box(&data), 3, &cfg, &KmeansInit::Forgy).unwrap())
    });
}

fn bench_kernel_matrix(c: &mut Criterion) {
    let data = blobs3(500, 0.5, 5);
    c.bench_function("kernel_matrix_gaussian_n500", |b| {
        b.iter(|| kernels::kernel_matrix(KernelSpec::Gaussian { sigma: 1.0 }, black_box(&data)))
    });
}

fn bench_sym_eig(c: &mut Criterion) {
    let data = blobs3(150, 0.5, 6);
    let g = graph::build_graph(&data, KernelSpec::Heaviside { eps: 1.5 }).expect("graph");
    let na = graph::normalized_adjacency(&g).expect("positive degrees");
    c.bench_function("sym_eig_full_n150", |b| {
        b.iter(|| sym_eig(black_box(&na), 150).unwrap())
    });
}

fn bench_dbscan(c: &mut Criterion) {
    let data = blobs3(500, 0.16, 7);
    let p = DbscanParams::new(0.5, 5).expect("params");
    c.bench_function("dbscan_graph_n500", |b| {
        b.iter(|| density::dbscan_graph(black_box(&data), p).unwrap())
    });
}

fn bench_mean_shift(c: &mut Criterion) {
    let data = blobs3(300, 0.16, 8);
    c.bench_function("mean_shift_n300", |b| {
        b.iter(|| density::mean_shift(black_box(&data), 1.0).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_em, bench_kmeans, bench_kernel_matrix, bench_sym_eig,
        bench_dbscan, bench_mean_shift
}
criterion_main!(benches);
