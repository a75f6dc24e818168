use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qualia_core::evolution::Arena;
use qualia_core::exact::QuantumTable;
use qualia_core::exec::Execution;
use qualia_core::lattice::{Lattice, LatticeConfig};
use qualia_core::pipeline::Pipeline;
use qualia_core::predicate::{parse_predicates, ParseContext};
use qualia_core::qualia::ProgramRules;
use qualia_core::sampler::BaseSamples;
use qualia_core::substrate::{InitialState, Substrate, SubstrateConfig, DEFAULT_BRANCH_CAP};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sampling(c: &mut Criterion) {
    let lat = Lattice::new(LatticeConfig::line(4, 4, 1, 1)).unwrap();
    let rules = ProgramRules::new(
        parse_predicates("quale hi: rho[0][0] > 0.7\nquale mid: mean(rho) > 0.4", &ParseContext::for_lattice(&lat)).unwrap(),
    );
    let s = Substrate::new(lat, SubstrateConfig::new(0.7, 0.4, InitialState::Product("1+01".into()))).unwrap();
    let mut g = c.benchmark_group("sample_5000");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| BaseSamples::draw(&Pipeline::new(&s, &rules, exec), black_box(5000), 1).unwrap())
        });
    }
    g.finish();
}

fn enumeration(c: &mut Criterion) {
    let scenario = Arena::stock_asymmetric().build().unwrap();
    let lat = Lattice::new(LatticeConfig::line(3, 3, 1, 1)).unwrap();
    let rules = ProgramRules::new(parse_predicates("quale hi: rho[0][0] > 0.6", &ParseContext::for_lattice(&lat)).unwrap());
    let s = Substrate::new(lat, SubstrateConfig::new(0.5, 0.5, InitialState::Product("+10".into()))).unwrap();
    let mut g = c.benchmark_group("enumerate");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new("motifs", name), &exec, |b, &exec| {
            b.iter(|| QuantumTable::build(&scenario.pipeline(exec), DEFAULT_BRANCH_CAP).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("three_cells", name), &exec, |b, &exec| {
            b.iter(|| QuantumTable::build(&Pipeline::new(&s, &rules, exec), DEFAULT_BRANCH_CAP).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sampling, enumeration);
criterion_main!(benches);
