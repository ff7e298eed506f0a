use std::f64::consts::LN_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use geolyap_core::flow::rk4_step;
use geolyap_core::lyapunov::construct_exp_v;
use geolyap_core::manifold::sampling::{random_point_in_shell, random_tangent, seeded_rng};
use geolyap_core::manifold::{exp_map, log_map, ManifoldKind, ManifoldPoint};
use geolyap_core::systems;

fn exp_log(c: &mut Criterion) {
    let mut rng = seeded_rng(0);
    for kind in [ManifoldKind::Sphere(2), ManifoldKind::So3, ManifoldKind::Hyperbolic2] {
        let x = ManifoldPoint::origin(kind);
        let v = random_tangent(&x, 1.0, &mut rng);
        let y = exp_map(&x, &v).unwrap();
        c.bench_function(&format!("exp/{kind}"), |b| b.iter(|| exp_map(black_box(&x), black_box(&v)).unwrap()));
        c.bench_function(&format!("log/{kind}"), |b| b.iter(|| log_map(black_box(&x), black_box(&y)).unwrap()));
    }
}

fn integrator(c: &mut Criterion) {
    let mut rng = seeded_rng(1);
    for kind in [ManifoldKind::Sphere(2), ManifoldKind::So3] {
        let x_star = ManifoldPoint::origin(kind);
        let f = systems::time_varying_attractor(&x_star, 1.5, 0.5).unwrap();
        let x = random_point_in_shell(&x_star, 0.5, 1.0, &mut rng);
        c.bench_function(&format!("rk4_step/{kind}"), |b| b.iter(|| rk4_step(&f, 0.3, black_box(&x), 1e-2).unwrap()));
    }
}

fn lyapunov(c: &mut Criterion) {
    let x_star = ManifoldPoint::origin(ManifoldKind::Sphere(2));
    let f = systems::geodesic_attractor(&x_star, 1.0).unwrap();
    let v = construct_exp_v(&f, &x_star, LN_2, 1.0).unwrap();
    let x = random_point_in_shell(&x_star, 0.5, 1.0, &mut seeded_rng(2));
    c.bench_function("evaluate_v/sphere2", |b| b.iter(|| v.evaluate_v(1.0, black_box(&x)).unwrap()));
    c.bench_function("lie_derivative/sphere2", |b| b.iter(|| v.lie_derivative(1.0, black_box(&x)).unwrap()));
}

criterion_group!(benches, exp_log, integrator, lyapunov);
criterion_main!(benches);
