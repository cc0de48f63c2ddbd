use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use trajsim::*;

fn generate(d: Distribution, until: f64) {
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("g", Trajectory::new().timeout(1.0), d).mon(0))
        .unwrap();
    env.run(until).unwrap();
}

fn batch_m_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("batch_m_sweep");
    group.sample_size(20);
    for m in [1usize, 10, 50, 100] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| generate(exponential(1.0).batched(m), 20_000.0))
        });
    }
    group.finish();
}

fn thunk_vs_constant(c: &mut Criterion) {
    let mut group = c.benchmark_group("thunk_vs_constant");
    group.sample_size(20);
    let n = 100_000;
    group.bench_function("constant", |b| {
        b.iter(|| {
            let t = Trajectory::new().timeout(1.0);
            let mut env = Environment::new();
            env.add_generator(GeneratorSpec::new("g", t, at(vec![0.0; n])).mon(0))
                .unwrap();
            env.run(f64::INFINITY).unwrap();
        })
    });
    group.bench_function("thunk", |b| {
        b.iter(|| {
            let t = Trajectory::new().timeout(Param::dynamic(|_| 1.0));
            let mut env = Environment::new();
            env.add_generator(GeneratorSpec::new("g", t, at(vec![0.0; n])).mon(0))
                .unwrap();
            env.run(f64::INFINITY).unwrap();
        })
    });
    group.finish();
}

criterion_group!(benches, batch_m_sweep, thunk_vs_constant);
criterion_main!(benches);
