use std::f64::consts::FRAC_PI_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use twistorlab_core::families::{self, Profile, ProfileSpec};
use twistorlab_core::metric::MAX_GEOMETRY_ORDER;
use twistorlab_core::twistor::{killing_twistor_suite, KillingSamples};
use twistorlab_core::{TaylorScalar, Tolerances};

fn jet_product(c: &mut Criterion) {
    let mut group = c.benchmark_group("jet_product");
    for (nvars, order) in [(3, 2), (4, 3), (6, 3), (6, 4)] {
        let point: Vec<f64> = (0..nvars).map(|i| 0.3 + 0.1 * i as f64).collect();
        let x = TaylorScalar::variables(&point, order);
        let a = x[0].sin();
        let b = x[nvars - 1].cos();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{nvars}v_o{order}")), &(a, b), |bench, (a, b)| {
            bench.iter(|| black_box(a) * black_box(b))
        });
    }
    group.finish();
}

fn geometry_build(c: &mut Criterion) {
    let gamma = Profile::from_spec(&ProfileSpec::PerturbedSin { epsilon: 0.1 }).unwrap();
    let instances = [
        ("round_sphere_4", families::round_sphere(4, 1.0).unwrap()),
        ("mapping_torus_4", families::warped_mapping_torus(4, 2.0).unwrap()),
        ("perturbed_join_5", families::riemannian_join(5, &gamma, FRAC_PI_2, None).unwrap()),
    ];
    let mut group = c.benchmark_group("geometry_build");
    for (name, inst) in &instances {
        let p = inst.metric.domain().center();
        group.bench_function(*name, |bench| {
            bench.iter(|| inst.metric.geometry(black_box(&p), MAX_GEOMETRY_ORDER).unwrap())
        });
    }
    group.finish();
}

fn suite_per_point(c: &mut Criterion) {
    let inst = families::warped_mapping_torus(4, 2.0).unwrap();
    let points = inst.metric.domain().halton_points(8, 42);
    let tol = Tolerances::default();
    c.bench_function("killing_twistor_suite_8_points", |bench| {
        bench.iter(|| {
            let s = KillingSamples::evaluate(inst.distinguished(), &points);
            killing_twistor_suite(&s, &tol)
        })
    });
}

criterion_group!(benches, jet_product, geometry_build, suite_per_point);
criterion_main!(benches);
