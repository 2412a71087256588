use criterion::{black_box, criterion_group, criterion_main, Criterion};
use typical_core::arithmetic::{exp_partial_sum, sum_set, DEFAULT_EXPANSION_CAP};
use typical_core::avoidance::{generate, scan, Constraint, GenerateConfig, ScanOptions};
use typical_core::dyadic::dyadic_grid;
use typical_core::geom::{affine_dependence_margin, hausdorff_distance, similarity_gap, Pattern};
use typical_core::scalar::rat;
use typical_core::{FinitePointSet, Point};

fn predicates(c: &mut Criterion) {
    let a = Point::ratios(&[(1, 3), (2, 7)]);
    let b = Point::ratios(&[(5, 8), (1, 9)]);
    let d = Point::ratios(&[(3, 4), (7, 11)]);
    let p = Pattern::equilateral();
    c.bench_function("similarity_gap exact", |bench| bench.iter(|| similarity_gap(black_box(&a), &b, &d, &p)));
    let fa = Point::float(a.to_f64());
    let fb = Point::float(b.to_f64());
    let fd = Point::float(d.to_f64());
    c.bench_function("similarity_gap float", |bench| bench.iter(|| similarity_gap(black_box(&fa), &fb, &fd, &p)));
    let tet = [a.clone(), b.clone(), d.clone(), Point::ratios(&[(1, 2), (1, 2)])];
    c.bench_function("affine_dependence 2d", |bench| bench.iter(|| affine_dependence_margin(black_box(&tet[..3]))));
}

fn sets(c: &mut Criterion) {
    let grid = dyadic_grid(3, 2, 1 << 20).unwrap();
    let shifted = FinitePointSet::new(
        2,
        grid.points().iter().map(|p| Point::exact(p.exact_coords().unwrap().iter().map(|x| *x / rat(2, 1)).collect())).collect(),
    )
    .unwrap();
    c.bench_function("hausdorff 81x81 exact", |bench| bench.iter(|| hausdorff_distance(black_box(&grid), &shifted)));

    let cert = generate(&GenerateConfig::new(3, 2, Constraint::GeneralPosition, 1)).unwrap();
    c.bench_function("scan general position n=3 d=2", |bench| {
        bench.iter(|| scan(black_box(&cert.gamma), &Constraint::GeneralPosition, ScanOptions::default()))
    });
    let mut group = c.benchmark_group("generate");
    group.sample_size(10);
    group.bench_function("pattern n=3 d=2", |bench| {
        bench.iter(|| generate(&GenerateConfig::new(3, 2, Constraint::Pattern(Pattern::equilateral()), black_box(2))))
    });
    group.finish();

    let base = FinitePointSet::from_rationals([rat(0, 1), rat(1, 3), rat(2, 5), rat(5, 7), rat(1, 1)]);
    c.bench_function("sum_set m=4", |bench| bench.iter(|| sum_set(black_box(&base), 4, DEFAULT_EXPANSION_CAP)));
    let pair = FinitePointSet::from_rationals([rat(3, 7), rat(5, 11)]);
    c.bench_function("exp partial sum m=5", |bench| bench.iter(|| exp_partial_sum(black_box(&pair), 5, DEFAULT_EXPANSION_CAP)));
}

criterion_group!(benches, predicates, sets);
criterion_main!(benches);
