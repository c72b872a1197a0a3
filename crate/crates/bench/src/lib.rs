//! Criterion benchmarks for the closed forms, the oracle and the sensing kernels.

use std::f64::consts::FRAC_PI_3;
use std::hint::black_box;

use criterion::{BenchmarkId, Criterion};
use ripangle::lab::{
    exhaustive_ric, gaussian_matrix, near_orthogonal_matrix, omp, sparse_pair, support_ric,
    trial_rng,
};
use ripangle::{angle_interval, normalize_scenario, oracle_extremes, DVector};

pub fn closed_forms(c: &mut Criterion) {
    c.bench_function("angle_interval", |b| {
        b.iter(|| angle_interval(black_box(0.3), black_box(FRAC_PI_3)))
    });
}

pub fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_extremes");
    group.sample_size(10);
    let scenario = normalize_scenario(0.3, FRAC_PI_3).unwrap();
    for n in [32usize, 96] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| oracle_extremes(&scenario, n))
        });
    }
    group.finish();
}

pub fn sensing(c: &mut Criterion) {
    let phi = gaussian_matrix(128, 256, &mut trial_rng(1, 0));
    let support: Vec<usize> = (0..8).map(|i| i * 31).collect();
    c.bench_function("support_ric_8_of_128x256", |b| {
        b.iter(|| support_ric(&phi, black_box(&support)))
    });

    c.bench_function("sparse_pair_measure", |b| {
        let mut rng = trial_rng(2, 0);
        b.iter(|| sparse_pair(256, 8, 1.0, &mut rng).unwrap().measure(&phi))
    });

    let x = {
        let mut x = DVector::zeros(256);
        for (i, &j) in support.iter().enumerate() {
            x[j] = 1.0 + 0.1 * i as f64;
        }
        x
    };
    let y = &phi * &x;
    c.bench_function("omp_k8_128x256", |b| b.iter(|| omp(&phi, &y, 8, Some(&x))));

    let small = near_orthogonal_matrix(28, 32, 0.005, &mut trial_rng(3, 0));
    let mut group = c.benchmark_group("exhaustive_ric_28x32");
    group.sample_size(10);
    group.bench_function("order_3", |b| b.iter(|| exhaustive_ric(&small, 3)));
    group.finish();
}

pub fn benchmarks(c: &mut Criterion) {
    closed_forms(c);
    oracle(c);
    sensing(c);
}
