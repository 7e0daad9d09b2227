use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use phasewig_core::numgrid::PhaseGrid;
use phasewig_core::par::{self, ExecMode};
use phasewig_core::states::{oscillator_eigenstate, OscillatorParams};
use phasewig_core::symcalc::GeneratingFunction;
use phasewig_core::wigner::{covariant_wigner, wigner_direct, KetConvention};

fn modes(c: &mut Criterion) {
    let pq = GeneratingFunction::parse("p*q").unwrap();
    for n in [128, 256] {
        let g = PhaseGrid::square(12.0, n, 1.0).unwrap();
        let psi = oscillator_eigenstate(3, OscillatorParams::unit(), &g).unwrap();
        let mut group = c.benchmark_group(format!("wigner-{n}"));
        group.sample_size(10);
        for mode in [ExecMode::Parallel, ExecMode::Sequential] {
            let label = format!("{mode:?}").to_lowercase();
            group.bench_function(BenchmarkId::new("direct", &label), |b| {
                par::set_mode(mode);
                b.iter(|| wigner_direct(&psi, &g).unwrap())
            });
            group.bench_function(BenchmarkId::new("covariant", &label), |b| {
                par::set_mode(mode);
                b.iter(|| covariant_wigner(&psi, &pq, &g, KetConvention::Doubled).unwrap())
            });
        }
        group.finish();
    }
    par::set_mode(ExecMode::Parallel);
}

criterion_group!(benches, modes);
criterion_main!(benches);
