use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use csbp_bench::context;
use csbp_core::{ConditionalTransform, Inverter};

fn density(c: &mut Criterion) {
    let inverter = Inverter::default();
    let mut group = c.benchmark_group("density");
    for x in [1.0, 1e3, 1e6] {
        let handle = ConditionalTransform::conditional(context(x)).expect("survival is positive");
        let y = handle.mean();
        group.bench_function(format!("x={x:e}"), |b| {
            b.iter(|| inverter.density(&handle, black_box(y)).expect("inversion succeeds"))
        });
    }
    group.finish();
}

fn cdf(c: &mut Criterion) {
    let inverter = Inverter::default();
    let handle = ConditionalTransform::conditional(context(1.0)).expect("survival is positive");
    c.bench_function("cdf x=1", |b| {
        b.iter(|| inverter.cdf(&handle, black_box(2.0)).expect("inversion succeeds"))
    });
}

criterion_group!(benches, density, cdf);
criterion_main!(benches);
