use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use steerlearn::qstate::{random_density_matrix, random_measurement_set, Assemblage};
use steerlearn::s4vm::{s4vm_predict, S4vmParams};
use steerlearn::steering::{solve_steering_sdp, SdpSettings};
use steerlearn::svm::{smo, Dataset, Gram, SmoSettings};

fn sdp(c: &mut Criterion) {
    let mut group = c.benchmark_group("steering_sdp");
    let state = random_density_matrix(3);
    let settings = SdpSettings::default();
    for m in [2, 4, 8] {
        let asm = Assemblage::from_state(&state, &random_measurement_set(m, 11).unwrap());
        group.bench_with_input(BenchmarkId::from_parameter(m), &asm, |b, asm| {
            b.iter(|| black_box(solve_steering_sdp(asm, &settings).unwrap()))
        });
    }
    group.finish();
}

/// Random-state features labeled by the sign of a fixed linear form.
fn dataset(n: usize, seed: u64) -> Dataset {
    let xs: Vec<_> = (0..n)
        .map(|i| random_density_matrix(seed + i as u64).feature_vector().0)
        .collect();
    let ys = xs
        .iter()
        .map(|x| if x[0] + 0.3 * x[4] >= 0.0 { 1 } else { -1 })
        .collect();
    Dataset::new(xs, ys).unwrap()
}

fn svm(c: &mut Criterion) {
    let mut group = c.benchmark_group("smo");
    for n in [100, 300] {
        let data = dataset(n, 1000);
        let gram = Gram::new(data.features(), 2.0);
        let cs = vec![10.0; n];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                black_box(smo::solve(&gram, data.labels(), &cs, &SmoSettings::default()).unwrap())
            })
        });
    }
    group.finish();
}

fn s4vm(c: &mut Criterion) {
    let labeled = dataset(30, 5000);
    let unlabeled = dataset(100, 9000);
    let params = S4vmParams {
        c1: 10.0,
        c2: 1.0,
        gamma: 2.0,
        ..S4vmParams::default()
    };
    let mut group = c.benchmark_group("s4vm");
    group.sample_size(10);
    group.bench_function("l30_u100", |b| {
        b.iter(|| black_box(s4vm_predict(&labeled, unlabeled.features(), &params, 7).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, sdp, svm, s4vm);
criterion_main!(benches);
