// Basis, assembly and verification of the reference instance.
//
// With the default `parallel` feature each stage runs twice: on a one-thread
// rayon pool and on the global pool. `cargo bench --no-default-features`
// measures the plain sequential build instead.

use std::hint::black_box;
use std::time::Duration;

use caputo_series::solver::{assemble, verify, ProblemConfig};
use caputo_series::spectral::{build_quadrature, compute_basis};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn config() -> ProblemConfig {
    ProblemConfig {
        verify_steps: 1024,
        ..ProblemConfig::reference()
    }
}

fn stages(c: &mut Criterion, label: &str, run: &dyn Fn(&mut (dyn FnMut() + Send))) {
    let cfg = config();
    let q = build_quadrature(cfg.quad_order).unwrap();
    let field = assemble(&cfg).unwrap();

    let mut g = c.benchmark_group("basis");
    g.bench_function(BenchmarkId::from_parameter(label), |b| {
        b.iter(|| run(&mut || drop(black_box(compute_basis(&cfg.spec, &q, cfg.modes).unwrap()))))
    });
    g.finish();

    let mut g = c.benchmark_group("assemble");
    g.bench_function(BenchmarkId::from_parameter(label), |b| {
        b.iter(|| run(&mut || drop(black_box(assemble(&cfg).unwrap()))))
    });
    g.finish();

    let mut g = c.benchmark_group("verify");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    g.bench_function(BenchmarkId::from_parameter(label), |b| {
        b.iter(|| run(&mut || drop(black_box(verify(&field, &cfg).unwrap()))))
    });
    g.finish();
}

#[cfg(feature = "parallel")]
fn pipeline(c: &mut Criterion) {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    stages(c, "1-thread", &|f| single.install(f));
    let label = format!("global-pool-{}", rayon::current_num_threads());
    stages(c, &label, &|f| f());
}

#[cfg(not(feature = "parallel"))]
fn pipeline(c: &mut Criterion) {
    stages(c, "sequential", &|f| f());
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
