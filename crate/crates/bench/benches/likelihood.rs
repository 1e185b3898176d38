use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use csbp_bench::{fixture_path, reference_params};
use csbp_core::estimation::loglik;
use csbp_core::Inverter;

fn path_loglik(c: &mut Criterion) {
    let inverter = Inverter::default();
    let path = fixture_path(20);
    let params = reference_params();
    c.bench_function("loglik 20 steps", |b| {
        b.iter(|| loglik(black_box(&params), &path, &inverter).expect("likelihood evaluates"))
    });
}

criterion_group!(benches, path_loglik);
criterion_main!(benches);
