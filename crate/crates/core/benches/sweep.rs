//! Benchmarks for the enumeration core: the same workload through the
//! parallel reducer and the sequential one, plus the end-to-end dichotomy
//! sweep (which uses whichever path the `parallel` feature selects).

use commlab::freealg::parse_poly;
use commlab::imagelab::{CompiledPoly, FiniteRing, FiniteRingSpec, IdSet};
use commlab::scalar::ScalarDomain;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

/// Full image enumeration of a two-variable polynomial on M_2(GF(3)):
/// 81^2 substitution tuples through a chosen map-reduce driver.
fn image_workload(run_parallel: bool) -> usize {
    let spec = FiniteRingSpec::new(2, 3).unwrap();
    let ring = FiniteRing::new(spec).unwrap();
    let domain = ScalarDomain::prime_field(3).unwrap();
    let poly = parse_poly("x1*x2 - x2*x1 + x1^2*x2", domain).unwrap();
    let compiled = CompiledPoly::compile(&poly, &ring).unwrap();
    let size = ring.size();
    let universe = size as usize;
    let total = universe * universe;
    let map = |range: std::ops::Range<usize>| {
        let mut s = IdSet::new(universe);
        for idx in range {
            let a = (idx % universe) as u32;
            let b = (idx / universe) as u32;
            s.insert(compiled.eval(&ring, &[a, b]));
        }
        s
    };
    let merge = |mut a: IdSet, b: IdSet| {
        a.union_with(&b);
        a
    };
    let out = if run_parallel {
        commlab::par_chunk_reduce(total, 512, map, IdSet::new(universe), merge)
    } else {
        commlab::seq_chunk_reduce(total, 512, map, IdSet::new(universe), merge)
    };
    out.len()
}

fn bench_map_reduce(c: &mut Criterion) {
    let mut group = c.benchmark_group("image_enumeration_m2_gf3");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(image_workload(false)))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| b.iter(|| black_box(image_workload(true))));
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("dichotomy_sweep_m2_gf2");
    group.sample_size(10);
    group.bench_function("degree2", |b| {
        b.iter(|| black_box(commlab::imagelab::sweep_m2f2(2, 2).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, bench_map_reduce, bench_sweep);
criterion_main!(benches);
