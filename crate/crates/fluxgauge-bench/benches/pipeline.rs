use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use fluxgauge::{
    assemble, compute_alphas, loop_battery, path_integral_im, path_integral_sm, rasterize, solve,
    DirichletSpec, Method, Tolerances,
};
use fluxgauge_bench::{centered_case, slot_case};

fn bench_rasterize(c: &mut Criterion) {
    let sc = centered_case(128);
    c.bench_function("rasterize_128", |b| {
        b.iter(|| rasterize(black_box(&sc.grid), black_box(&sc.structure)).unwrap())
    });
}

fn bench_assemble(c: &mut Criterion) {
    let sc = centered_case(128);
    let mask = sc.mask().unwrap();
    let field = sc.field_grid(&mask).unwrap();
    c.bench_function("assemble_128", |b| {
        b.iter(|| assemble(black_box(&mask), black_box(&field), &DirichletSpec::magnetostatic()).unwrap())
    });
}

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for n in [128usize, 256] {
        let sc = centered_case(n);
        let mask = sc.mask().unwrap();
        let field = sc.field_grid(&mask).unwrap();
        let sys = assemble(&mask, &field, &DirichletSpec::magnetostatic()).unwrap();
        group.bench_with_input(BenchmarkId::new("cg", n), &sys, |b, sys| {
            b.iter(|| solve(black_box(sys), Method::Cg, 1e-10, 0).unwrap())
        });
    }
    group.finish();
}

fn bench_integrals(c: &mut Criterion) {
    let sc = slot_case();
    let solution = sc.solve_magnetostatic().unwrap();
    let paths = sc.junction_paths().unwrap();
    c.bench_function("path_integral_sm", |b| {
        b.iter(|| path_integral_sm(black_box(&solution.psi), black_box(&paths.path1)).unwrap())
    });
    c.bench_function("path_integral_im", |b| {
        b.iter(|| path_integral_im(black_box(&solution.psi), black_box(&paths.path1), 4).unwrap())
    });
    c.bench_function("compute_alphas", |b| {
        b.iter(|| {
            compute_alphas(
                black_box(&solution.psi),
                black_box(&solution.field_grid),
                black_box(&paths),
                4,
            )
            .unwrap()
        })
    });
}

fn bench_battery(c: &mut Criterion) {
    let sc = centered_case(128);
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("battery");
    group.sample_size(10);
    group.bench_function("loop_battery_128", |b| {
        b.iter(|| loop_battery(black_box(&sc), &tol).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_rasterize,
    bench_assemble,
    bench_solve,
    bench_integrals,
    bench_battery
);
criterion_main!(benches);
