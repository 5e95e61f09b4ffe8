//! Sequential against parallel execution for each envelope engine.

use cct_core::convex::{biconjugate_envelope, oberman_convex_envelope, StencilSpec};
use cct_core::moreau::{iterative_moreau, lower_moreau, squared_distance_transform};
use cct_core::{set_execution, Execution, Geometry, MaskGrid, ScalarGrid};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn wavy(n: usize) -> ScalarGrid {
    let geom = Geometry::centered(&[n, n], 2.0 / n as f64).unwrap();
    ScalarGrid::from_fn(geom, |x| {
        (5.0 * x[0]).sin() * (3.0 * x[1]).cos() + 0.3 * x[0] * x[1]
    })
    .unwrap()
}

fn engines(c: &mut Criterion) {
    let big = wavy(512);
    let small = wavy(96);
    let stencil = StencilSpec::new(2, 1).unwrap();
    let mask =
        MaskGrid::from_index_fn(big.geometry().clone(), |i| (i[0] * 7 + i[1] * 13) % 97 == 0);

    let mut group = c.benchmark_group("engines");
    group.sample_size(10);
    for (label, mode) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        set_execution(mode);
        group.bench_with_input(BenchmarkId::new("lower_moreau_512", label), &big, |b, g| {
            b.iter(|| lower_moreau(g, 40.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("edt_512", label), &mask, |b, m| {
            b.iter(|| squared_distance_transform(m).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("iterative_moreau_96", label),
            &small,
            |b, g| b.iter(|| iterative_moreau(g, 40.0, 96).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("oberman_96_x200", label),
            &small,
            |b, g| b.iter(|| oberman_convex_envelope(g, 0.0, &stencil, 200).unwrap()),
        );
        group.bench_with_input(BenchmarkId::new("biconjugate_96", label), &small, |b, g| {
            b.iter(|| biconjugate_envelope(g, 0.05).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, engines);
criterion_main!(benches);
