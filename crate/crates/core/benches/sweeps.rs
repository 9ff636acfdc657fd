use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entroprec::experiments::{sweep, Axis, TwoIonConfig};
use entroprec::parallel::Execution;

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    let cases = [
        ("phi_unitary", Axis::Phi, "fig3"),
        ("phi_lindblad", Axis::Phi, "fig4"),
        ("gamma", Axis::Gamma, "fig5"),
        ("N", Axis::N, "fig6"),
    ];
    for (name, axis, preset) in cases {
        let template = TwoIonConfig::preset(preset).unwrap();
        let points = axis.default_points();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let id = BenchmarkId::new(name, format!("{exec:?}").to_lowercase());
            group.bench_function(id, |b| {
                b.iter(|| sweep(axis, &points, &template, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
