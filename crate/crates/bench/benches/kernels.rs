use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinnet::graph::standard_graph;
use spinnet::hamiltonian::build_tfim;
use spinnet::spectral::{eigensystem, spectral_deformation_dn};
use spinnet::thermal::thermal_qfi_sld;
use spinnet::{evolve, GaConfig, GraphKind, SpinSystemParams};

fn hamiltonian(c: &mut Criterion) {
    let p = SpinSystemParams::default();
    let mut group = c.benchmark_group("build_tfim");
    for n in [6, 8, 10] {
        let g = standard_graph(GraphKind::Complete, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| build_tfim(black_box(g), &p).unwrap())
        });
    }
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let p = SpinSystemParams::default();
    let mut group = c.benchmark_group("eigensystem");
    group.sample_size(10);
    for n in [6, 8, 9] {
        let h = build_tfim(&standard_graph(GraphKind::Complete, n).unwrap(), &p).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| b.iter(|| eigensystem(black_box(h)).unwrap()));
    }
    group.finish();

    let mut group = c.benchmark_group("dn");
    group.sample_size(10);
    for n in [8, 10, 11] {
        let g = standard_graph(GraphKind::Cycle, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| spectral_deformation_dn(black_box(g), &p).unwrap())
        });
    }
    group.finish();
}

fn thermal(c: &mut Criterion) {
    let p = SpinSystemParams::default();
    let mut group = c.benchmark_group("thermal_qfi_sld");
    group.sample_size(10);
    for n in [4, 6, 8] {
        let g = standard_graph(GraphKind::Complete, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| b.iter(|| thermal_qfi_sld(black_box(g), &p).unwrap()));
    }
    group.finish();
}

fn ga(c: &mut Criterion) {
    let mut group = c.benchmark_group("ga_run");
    group.sample_size(10);
    for n in [4, 6] {
        let mut cfg = GaConfig::new(n, 1);
        cfg.population = 20;
        cfg.generations = 3;
        cfg.compute_qfi = false;
        group.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| b.iter(|| evolve(black_box(cfg)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, hamiltonian, spectrum, thermal, ga);
criterion_main!(benches);
