use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ocslab_bench::offset_cloud;
use ocslab_core::kernels::gram_matrix;
use ocslab_core::nalgebra::{DMatrix, DVector};
use ocslab_core::qp::{self, QpProblem, QuadTerm};
use ocslab_core::rng::SplitMix64;
use ocslab_core::slab::{self, SlabTrainConfig};
use ocslab_core::{KernelSpec, SolverConfig};

fn bench_gram(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram_matrix");
    for &m in &[100usize, 400] {
        let x = offset_cloud(1, m, 16);
        for kernel in [
            KernelSpec::linear(),
            KernelSpec::rbf(0.5).unwrap(),
            KernelSpec::chi_squared(),
        ] {
            group.bench_with_input(
                BenchmarkId::new(kernel.family().name(), m),
                &x,
                |b, x| b.iter(|| gram_matrix(&kernel, x).unwrap()),
            );
        }
    }
    group.finish();
}

fn bench_qp_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("qp_solve");
    for &n in &[40usize, 120] {
        let mut rng = SplitMix64::new(2);
        let mat = DMatrix::from_fn(n, n, |_, _| rng.next_f64() * 2.0 - 1.0);
        let mut q = &mat * mat.transpose();
        for i in 0..n {
            q[(i, i)] += 1.0;
        }
        let a = DMatrix::from_element(1, n, 1.0);
        let b = DVector::from_element(1, 1.0);
        let problem = QpProblem::new(
            QuadTerm::Dense(q),
            DVector::zeros(n),
            a,
            b,
            DVector::zeros(n),
            DVector::from_element(n, 0.2),
        )
        .unwrap();
        let config = SolverConfig::default();
        group.bench_with_input(BenchmarkId::from_parameter(n), &problem, |bch, p| {
            bch.iter(|| qp::solve(p, &config).unwrap())
        });
    }
    group.finish();
}

fn bench_slab_train(c: &mut Criterion) {
    let mut group = c.benchmark_group("slab_train");
    group.sample_size(10);
    for &m in &[60usize, 150] {
        let x = offset_cloud(3, m, 4);
        let config = SlabTrainConfig::new(KernelSpec::rbf(0.5).unwrap());
        group.bench_with_input(BenchmarkId::from_parameter(m), &x, |b, x| {
            b.iter(|| slab::train_slab(x, &config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_gram, bench_qp_solve, bench_slab_train);
criterion_main!(benches);
