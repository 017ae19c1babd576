use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kepfair::colgen::{run_scheme, ColGenParams};
use kepfair::enumeration::enumerate_plans;
use kepfair::instance::{example_pool, Caps};
use kepfair::pricing::{PricingBackend, PricingSolver};
use kepfair::schemes::{FairnessConcept, SchemeKind};
use kepfair_bench::{pool, random_weights};

fn pricing(c: &mut Criterion) {
    let mut group = c.benchmark_group("pricing");
    for n in [16, 32, 64] {
        let inst = pool(n, 7);
        let w = random_weights(&inst, 11);
        for backend in [PricingBackend::Packing, PricingBackend::Hpief] {
            let solver = PricingSolver::with_backend(&inst, Caps::default(), backend).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("{backend:?}"), n), &w, |b, w| {
                b.iter(|| solver.solve(black_box(w)).unwrap())
            });
        }
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let inst = pool(10, 3);
    c.bench_function("enumerate_plans/10", |b| {
        b.iter(|| enumerate_plans(black_box(&inst), Caps::default(), None).unwrap())
    });
}

fn schemes(c: &mut Criterion) {
    let mut group = c.benchmark_group("colgen");
    group.sample_size(10);
    let example = example_pool();
    let gen = pool(24, 5);
    for concept in FairnessConcept::FAIR {
        group.bench_function(BenchmarkId::new(format!("example/{concept}"), "nswp"), |b| {
            b.iter(|| run_scheme(&example, Caps::default(), concept, SchemeKind::Nswp, &ColGenParams::default()).unwrap())
        });
        group.bench_function(BenchmarkId::new(format!("gen24/{concept}"), "nswp"), |b| {
            b.iter(|| run_scheme(&gen, Caps::default(), concept, SchemeKind::Nswp, &ColGenParams::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pricing, enumeration, schemes);
criterion_main!(benches);
