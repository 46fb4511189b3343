use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use reeb_core::convexity::certify_positive;
use reeb_core::cz::{geometric_index, path_to_symmetric_potential, spectral_index, SymplecticPath};
use reeb_core::flow::{find_periodic_orbit, variational_path, GlobalFrame, ScanParams, SymmetrySpec};
use reeb_core::linking::{gauss_link, ClosedCurve};
use reeb_core::{HamiltonianModel, PhasePoint, PolynomialPotential};

fn certify(c: &mut Criterion) {
    let v = PolynomialPotential::henon_heiles();
    let mut group = c.benchmark_group("certify");
    group.sample_size(10);
    for energy in [0.05, 0.1] {
        group.bench_function(format!("henon-heiles E={energy}"), |b| {
            b.iter(|| certify_positive(&v, black_box(energy), 16).unwrap())
        });
    }
    group.finish();
}

fn shooting(c: &mut Criterion) {
    let model = HamiltonianModel::henon_heiles();
    let scan = ScanParams { orbit_samples: 256, ..ScanParams::default() };
    let mut group = c.benchmark_group("orbit");
    group.sample_size(10);
    group.bench_function("henon-heiles rotational E=0.1", |b| {
        b.iter(|| find_periodic_orbit(&model, black_box(0.1), SymmetrySpec::Rotational, &scan).unwrap())
    });
    group.finish();
}

fn index(c: &mut Criterion) {
    let model = HamiltonianModel::henon_heiles();
    let orbit = find_periodic_orbit(&model, 0.1, SymmetrySpec::Rotational, &ScanParams::default()).unwrap();
    let path = variational_path(&model, &orbit, &GlobalFrame, 1, 512).unwrap();
    let mut group = c.benchmark_group("cz");
    group.sample_size(10);
    group.bench_function("variational path N=512", |b| {
        b.iter(|| variational_path(&model, &orbit, &GlobalFrame, 1, 512).unwrap())
    });
    group.bench_function("geometric N=512", |b| b.iter(|| geometric_index(black_box(&path)).unwrap()));
    let s = path_to_symmetric_potential(&path).unwrap();
    group.bench_function("spectral N=512", |b| b.iter(|| spectral_index(black_box(&s), 512).unwrap()));
    let rot = SymplecticPath::rotation(2.0 * std::f64::consts::PI * 1.3, 512);
    group.bench_function("geometric rotation N=512", |b| b.iter(|| geometric_index(black_box(&rot)).unwrap()));
    group.finish();
}

fn linking(c: &mut Criterion) {
    let a = ClosedCurve::hopf_fiber(PhasePoint::new(1.0, 0.0, 0.0, 0.0), 400).unwrap();
    let b = ClosedCurve::hopf_fiber(PhasePoint::new(0.0, 1.0, 0.0, 0.0), 400).unwrap();
    c.bench_function("gauss_link hopf 400", |bench| bench.iter(|| gauss_link(black_box(&a), black_box(&b)).unwrap()));
}

criterion_group!(benches, certify, shooting, index, linking);
criterion_main!(benches);
