use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use lpflow_core::appendix_verify::{bernstein_coeffs, dlt_check, poly::certificate_polys};
use lpflow_core::chain::{b_constant, char_fn_phi};
use lpflow_core::flow_classifier::{classify, threshold_n};
use lpflow_core::profile::{compare_directions, coordinate_profile_phi};
use lpflow_core::sampler::sample_uniform_ball_into;
use lpflow_core::{BallParams, Direction, McBudget, QuadratureSpec, RngStream};

fn sampler(c: &mut Criterion) {
    let mut g = c.benchmark_group("sampler");
    for n in [4usize, 32] {
        let params = BallParams::new(1.5, n).unwrap();
        let mut rng = RngStream::new(1, 0).generator();
        let mut x = vec![0.0; n];
        g.bench_with_input(BenchmarkId::new("uniform_ball", n), &n, |b, _| {
            b.iter(|| {
                sample_uniform_ball_into(params, &mut rng, &mut x);
                black_box(x[0])
            })
        });
    }
    g.finish();
}

fn profiles(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let params = BallParams::new(1.5, 5).unwrap();
    c.bench_function("coordinate_profile_phi", |b| {
        b.iter(|| coordinate_profile_phi(params, black_box(0.3), spec).unwrap())
    });
    let dirs: Vec<Direction> = (1..=4).map(|k| Direction::canonical(4, k).unwrap()).collect();
    let params = BallParams::new(1.0, 4).unwrap();
    let budget = McBudget::new(100_000).unwrap();
    c.bench_function("compare_directions_1e5", |b| {
        b.iter(|| compare_directions(params, 0.5, &dirs, budget, RngStream::new(7, 0)).unwrap())
    });
}

fn endpoint_constants(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    c.bench_function("char_fn_phi", |b| b.iter(|| char_fn_phi(1.5, black_box(3.0), spec).unwrap()));
    let mut g = c.benchmark_group("b_constant");
    g.sample_size(10);
    for k in [2usize, 6] {
        g.bench_with_input(BenchmarkId::new("p=1.5", k), &k, |b, &k| b.iter(|| b_constant(1.5, k, spec).unwrap()));
    }
    g.finish();
}

fn flow(c: &mut Criterion) {
    let mut g = c.benchmark_group("flow");
    g.sample_size(10);
    g.bench_function("classify_p1_n3", |b| b.iter(|| classify(BallParams::new(1.0, 3).unwrap()).unwrap()));
    g.bench_function("threshold_p1.75", |b| b.iter(|| threshold_n(black_box(1.75)).unwrap()));
    g.finish();
}

fn appendix(c: &mut Criterion) {
    let polys = certificate_polys();
    c.bench_function("bernstein_p1", |b| b.iter(|| bernstein_coeffs(&polys[1], 5).unwrap()));
    let spec = QuadratureSpec::new(1e-13, 1e-12, 4000).unwrap();
    let mut g = c.benchmark_group("layers");
    g.sample_size(10);
    g.bench_function("dlt_check", |b| b.iter(|| dlt_check(0.7, 2.4, 2.0, 0.8, spec).unwrap()));
    g.finish();
}

criterion_group!(benches, sampler, profiles, endpoint_constants, flow, appendix);
criterion_main!(benches);
