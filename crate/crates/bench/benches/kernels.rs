use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use softbec::spectral::luttinger_sy::lowest_levels;
use softbec::{
    assemble_potential, clipped_gaps, discretize, lowest_eigenvalues, sample_configuration,
    Boundary, Shape, SingleSitePotential, Spectrum, ThermoState,
};

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample");
    for l in [1e3, 1e5] {
        g.bench_function(format!("configuration_L{l}"), |b| {
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                clipped_gaps(&sample_configuration(1.0, black_box(l), seed).unwrap())
            })
        });
    }
    g.finish();
}

fn eigensolve(c: &mut Criterion) {
    let site = SingleSitePotential::new(Shape::Box { height: 1.0 }, 0.5, 0.5, 50.0).unwrap();
    let mut g = c.benchmark_group("eigen");
    for l in [500.0, 4000.0] {
        let config = sample_configuration(1.0, l, 3).unwrap();
        let field = assemble_potential(&config, &site, 1.0 / 32.0).unwrap();
        let op = discretize(&field, Boundary::Dirichlet).unwrap();
        g.bench_function(format!("lowest5_dim{}", op.dim()), |b| {
            b.iter(|| lowest_eigenvalues(black_box(&op), 5, 1e-11).unwrap())
        });
    }
    let gaps = clipped_gaps(&sample_configuration(1.0, 1e4, 5).unwrap());
    g.bench_function("luttinger_sy_lowest50", |b| {
        b.iter(|| lowest_levels(black_box(&gaps.gaps), 50).unwrap())
    });
    g.finish();
}

fn chemical_potential(c: &mut Criterion) {
    let gaps = clipped_gaps(&sample_configuration(1.0, 2000.0, 7).unwrap());
    let spec = Spectrum::from_levels(lowest_levels(&gaps.gaps, 400).unwrap(), 2000.0).unwrap();
    c.bench_function("thermo/mu_400_levels", |b| {
        b.iter_batched(
            || spec.clone(),
            |s| ThermoState::solve(&s, 1.0, 1.0, 2000.0, 1e-10).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, sampling, eigensolve, chemical_potential);
criterion_main!(benches);
