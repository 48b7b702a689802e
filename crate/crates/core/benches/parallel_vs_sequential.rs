use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use robust_drm::drm_bounds::Options;
use robust_drm::oracle::{search, SearchOptions};
use robust_drm::sweep::{parse_grid, sweep, Template};
use robust_drm::{BoundSide, DistortionFunction, Execution, MomentSpec, ShapeClass};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn oracle(c: &mut Criterion) {
    let h = DistortionFunction::parse("ph:0.8,0.75").unwrap();
    let m = MomentSpec::standard();
    let mut g = c.benchmark_group("oracle_search");
    g.sample_size(10);
    for (name, execution) in MODES {
        let opts = SearchOptions {
            budget: 4_000,
            execution,
            ..SearchOptions::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| search(&h, ShapeClass::Unimodal, BoundSide::Sup, &m, opts).unwrap())
        });
    }
    g.finish();
}

fn rvar_sweep(c: &mut Criterion) {
    let alphas = parse_grid("0.01:0.99:0.01").unwrap();
    let m = MomentSpec::standard();
    let mut g = c.benchmark_group("rvar_sweep_unimodal");
    g.sample_size(10);
    for (name, execution) in MODES {
        let opts = Options {
            execution,
            ..Options::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| sweep(&Template::Rvar { beta: 0.995 }, ShapeClass::Unimodal, &alphas, &m, opts))
        });
    }
    g.finish();
}

criterion_group!(benches, oracle, rvar_sweep);
criterion_main!(benches);
