use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frpmg::exec::Execution;
use frpmg::fourier::{dtau_max_many, DtauSearch, DualTimeConfig, StabilityMode, WavenumberGrid};
use frpmg::fr_ops::{build_fr_operators, Correction, NodeSet};
use frpmg::pmg::{ContractionForm, CycleSpec, Smoother};
use frpmg::schemes::{make_bdf, ButcherTableau};
use frpmg::sweeps::{sweep_contraction, ContractionSweep};

fn modes() -> [(&'static str, Execution); 2] {
    [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ]
}

fn contraction(c: &mut Criterion) {
    let ops = build_fr_operators(4, 1.0, 0.5, &NodeSet::GaussLegendre, Correction::Dg).unwrap();
    let sweep = ContractionSweep {
        ops,
        h: 1.0,
        mu: 0.1,
        k: 5.0 * PI / 16.0,
        cfg: DualTimeConfig::new(1.0, 7e-3, 1, make_bdf(2).unwrap(), ButcherTableau::ssprk3())
            .unwrap(),
        ratios: (0..64)
            .map(|i| 10f64.powf(0.05 + 0.06 * i as f64))
            .collect(),
        cycle: CycleSpec::preset("vap", 4, 0).unwrap(),
        smoother: Smoother::Erk,
        form: ContractionForm::Ratio,
    };
    let mut group = c.benchmark_group("contraction_sweep");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sweep_contraction(black_box(&sweep), exec).unwrap())
        });
    }
    group.finish();
}

fn cfl(c: &mut Criterion) {
    let ops = build_fr_operators(4, 1.0, 0.5, &NodeSet::GaussLegendre, Correction::Dg).unwrap();
    let mut search = DtauSearch::new(ops, 1.0, 0.0, StabilityMode::Coupled);
    search.grid = WavenumberGrid::LogSpaced {
        n: 32,
        min_fraction: 1e-3,
    };
    let cfgs: Vec<DualTimeConfig> = (0..16)
        .map(|i| {
            let dt = 0.02 * 1.3f64.powi(i);
            DualTimeConfig::new(
                dt,
                dt * 0.01,
                10,
                make_bdf(2).unwrap(),
                ButcherTableau::ssprk3(),
            )
            .unwrap()
        })
        .collect();
    let mut group = c.benchmark_group("coupled_dtau_max");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| dtau_max_many(black_box(&search), &cfgs, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, contraction, cfl);
criterion_main!(benches);
