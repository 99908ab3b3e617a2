use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use quatmatch_core::classsets::{genus_average_series, ideal_class_set, standard_eichler_order};
use quatmatch_core::heckedeg::{deg_t, stable_local_orbits, LocalPattern};
use quatmatch_core::verify::{check_theorem_1_1, theorem_1_3_grid, Harness};
use quatmatch_core::weilmatch::{lambda_section, verify_prop_3_1, InvarianceLevel, LocalQuadSpace};

fn class_sets(c: &mut Criterion) {
    let order = standard_eichler_order(30, 1).unwrap();
    c.bench_function("class set B(30), uncached", |b| b.iter(|| ideal_class_set(black_box(&order), None).unwrap()));
    let cs = ideal_class_set(&standard_eichler_order(2, 3).unwrap(), None).unwrap();
    c.bench_function("genus series (2,3), m <= 100", |b| b.iter(|| genus_average_series(black_box(&cs), 100).unwrap()));
}

fn local(c: &mut Criterion) {
    c.bench_function("orbit oracle, level p=3 k=2", |b| {
        b.iter(|| stable_local_orbits(LocalPattern::Level, black_box(3), 2).unwrap())
    });
    let sp = LocalQuadSpace::split(7).unwrap();
    let phi = sp.char_full_split().unwrap();
    c.bench_function("lambda section p=7, level K", |b| b.iter(|| lambda_section(black_box(&phi), InvarianceLevel::K).unwrap()));
    c.bench_function("lattice matchings p=5", |b| b.iter(|| verify_prop_3_1(black_box(5)).unwrap()));
    c.bench_function("deg T(m), (6,5), m <= 1000", |b| b.iter(|| (1..=1000u64).map(|m| deg_t(6, 5, m).unwrap()).sum::<u64>()));
}

fn identities(c: &mut Criterion) {
    let mut g = c.benchmark_group("identities");
    g.sample_size(10);
    g.bench_function("two-prime definite (1,2,3,1), m <= 50", |b| b.iter(|| check_theorem_1_1(1, 2, 3, 1, 1..=50).unwrap()));
    let cases = theorem_1_3_grid(100);
    g.bench_function("indefinite sweep, 18 cases, m <= 100", |b| b.iter(|| Harness::default().check_all(black_box(&cases)).unwrap()));
    g.finish();
}

criterion_group!(benches, class_sets, local, identities);
criterion_main!(benches);
