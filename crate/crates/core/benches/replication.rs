use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use trajsim::replicate::{replicate_seq, replication_env};
use trajsim::*;

fn mm1(i: usize) -> usize {
    let mut env = replication_env(1, i);
    env.add_resource(ResourceSpec::new("server")).unwrap();
    let t = Trajectory::new()
        .seize("server", 1)
        .timeout(Param::dynamic(|ctx| ctx.exponential(4.0)))
        .release("server", 1);
    env.add_generator(GeneratorSpec::new("c", t, exponential(2.0)))
        .unwrap();
    env.run(500.0).unwrap();
    get_mon_arrivals(&[&env], false).len()
}

fn replications(c: &mut Criterion) {
    let mut group = c.benchmark_group("mm1_replications");
    group.sample_size(10);
    for n in [8usize, 32] {
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| replicate_seq(n, mm1))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("rayon", n), &n, |b, &n| {
            b.iter(|| trajsim::replicate::replicate_par(n, mm1))
        });
    }
    group.finish();
}

criterion_group!(benches, replications);
criterion_main!(benches);
