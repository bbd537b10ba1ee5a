//! Data-parallel kernels on one thread versus the default rayon pool.
//!
//! `cargo bench -p aasg-core` times both schedules in the default build;
//! `cargo bench -p aasg-core --no-default-features` times the purely
//! sequential code path (the "pool" variants then run sequentially too).

use std::hint::black_box;

use aasg_core::fem::Grid2d;
use aasg_core::galerkin::{assemble_rhs, galerkin_operator, PhysicalSystem};
use aasg_core::montecarlo::run_mc;
use aasg_core::multiindex::IndexCatalog;
use aasg_core::par;
use aasg_core::randomfield::{kl_2d, FieldParams};
use aasg_core::sparsela::{BlockDiagonalPreconditioner, LinearOperator, Preconditioner, SolverOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn system(n_modes: usize, cells: usize) -> PhysicalSystem {
    let params = FieldParams { corr_len: 0.25, sigma: 0.25, mean: 1.0, n_modes };
    PhysicalSystem::new(kl_2d(params, Grid2d::new(cells).unwrap()).unwrap()).unwrap()
}

const SCHEDULES: [(&str, usize); 2] = [("one-thread", 1), ("pool", 0)];

fn galerkin_kernels(c: &mut Criterion) {
    let sys = system(10, 32);
    let catalog = IndexCatalog::full(10, 3).unwrap();
    let op = galerkin_operator(&sys, &catalog).unwrap();
    let x = assemble_rhs(&catalog, &sys.load);
    let mut y = vec![0.0; x.len()];
    let pre = BlockDiagonalPreconditioner::new(&sys.mean_factor);

    let mut group = c.benchmark_group("galerkin N=10 p=3 n=32");
    group.sample_size(20);
    for (name, threads) in SCHEDULES {
        group.bench_function(BenchmarkId::new("kron_apply", name), |b| {
            b.iter(|| par::with_threads(threads, || op.apply(black_box(&x), &mut y)))
        });
        group.bench_function(BenchmarkId::new("mean_preconditioner", name), |b| {
            b.iter(|| par::with_threads(threads, || pre.apply(black_box(&x), &mut y)))
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let sys = system(4, 16);
    let mut group = c.benchmark_group("monte carlo N=4 n=16");
    group.sample_size(10);
    for (name, threads) in SCHEDULES {
        group.bench_function(BenchmarkId::new("256 samples", name), |b| {
            b.iter(|| par::with_threads(threads, || run_mc(&sys, 256, black_box(7), SolverOptions::default()).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, galerkin_kernels, monte_carlo);
criterion_main!(benches);
