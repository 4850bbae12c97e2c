//! Timing of the operator model, the path oracle and the axiom checks.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nclift::axioms::{check_lift_axioms, LiftPair};
use nclift::hilbert::rng_from_seed;
use nclift::pathweight::{build_graph, moment_by_paths};
use nclift::products::{mixed_moment, random_word, FaceSide, ProductSpec};
use nclift::{CircleParam, PointedSpace, C64};

fn unit(theta: f64) -> CircleParam {
    CircleParam::new(C64::from_polar(1.0, theta)).unwrap()
}

fn specs() -> Vec<(&'static str, ProductSpec)> {
    let (i, one) = (unit(std::f64::consts::FRAC_PI_2), CircleParam::one());
    vec![
        ("tensor", ProductSpec::tensor(&[(i, i), (one, one)]).unwrap()),
        (
            "free",
            ProductSpec::free(&[(FaceSide::Left, i, one), (FaceSide::Left, one, one)]).unwrap(),
        ),
        (
            "bi-free",
            ProductSpec::free(&[(FaceSide::Left, i, one), (FaceSide::Right, one, one)]).unwrap(),
        ),
    ]
}

fn moments(c: &mut Criterion) {
    let h = PointedSpace::new(2).unwrap();
    let mut group = c.benchmark_group("mixed_moment");
    for (name, spec) in specs() {
        for len in [4, 8] {
            let word = random_word(&mut rng_from_seed(1), len, &[h, h], 2).unwrap();
            group.bench_with_input(BenchmarkId::new(name, len), &word, |b, w| {
                b.iter(|| mixed_moment(&spec, w, h, h).unwrap())
            });
        }
    }
    group.finish();
}

fn path_oracle(c: &mut Criterion) {
    let h = PointedSpace::new(2).unwrap();
    let mut group = c.benchmark_group("moment_by_paths");
    for (name, spec) in specs() {
        let graph = build_graph(&spec, 3).unwrap();
        let word = random_word(&mut rng_from_seed(2), 6, &[h, h], 2).unwrap();
        group.bench_function(name, |b| b.iter(|| moment_by_paths(&graph, &word, h, h).unwrap()));
    }
    group.finish();
}

fn lift_axioms(c: &mut Criterion) {
    let mut group = c.benchmark_group("lift_axioms");
    group.sample_size(10);
    for id in ["tensor", "free", "naive"] {
        let pair = LiftPair::from_id(id, unit(1.0), unit(2.0)).unwrap();
        group.bench_function(id, |b| b.iter(|| check_lift_axioms(&pair, &[2, 2, 2], 2, 0).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, moments, path_oracle, lift_axioms);
criterion_main!(benches);
