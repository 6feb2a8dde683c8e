//! Parallel against sequential execution on the three hot loops: the
//! reduced eigensolve, an Evans contour scan and a Hardy sample suite.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dirac_stab::clifford::realify;
use dirac_stab::evans::{winding, Contour, EvansOptions, ScanOptions};
use dirac_stab::exec::Execution;
use dirac_stab::linearize::assemble_nld_linearization;
use dirac_stab::profiles::{nld_solitary_wave, scaled_grid, NewtonOptions, Nonlinearity, SolitaryWave};
use dirac_stab::spectra::{eigensolve, EigenOptions, KeepVectors};
use dirac_stab::verify::{hardy_sample, SampleFamily, Weight};
use dirac_stab::C64;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn wave(points: usize) -> SolitaryWave {
    let g = scaled_grid(0.9, 1.0, 40.0, points).unwrap();
    nld_solitary_wave(0.9, 1.0, &Nonlinearity::power(1), &g, &NewtonOptions::default()).unwrap()
}

fn eigensolve_bench(c: &mut Criterion) {
    let w = wave(256);
    let lin = assemble_nld_linearization(&w, &realify(&w.rep)).unwrap();
    let mut group = c.benchmark_group("eigensolve_n256");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = EigenOptions { exec, keep: KeepVectors::None, ..Default::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, o| b.iter(|| eigensolve(&lin.jl, o).unwrap()));
    }
    group.finish();
}

fn evans_bench(c: &mut Criterion) {
    let w = wave(256);
    let contour = Contour::circle(C64::new(0.5, 0.0), 0.3);
    let mut group = c.benchmark_group("evans_circle");
    group.sample_size(10);
    for (name, exec) in MODES {
        let scan = ScanOptions { exec, ..Default::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &scan, |b, s| {
            b.iter(|| winding(&contour, &w, EvansOptions::default(), *s).unwrap())
        });
    }
    group.finish();
}

fn hardy_bench(c: &mut Criterion) {
    let samples = SampleFamily::new(0.05, 20.0, 1).draw(11, 64);
    let weight = Weight::power(1.0);
    let mut group = c.benchmark_group("hardy_64_samples");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| b.iter(|| hardy_sample(&weight, &samples, e).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, eigensolve_bench, evans_bench, hardy_bench);
criterion_main!(benches);
