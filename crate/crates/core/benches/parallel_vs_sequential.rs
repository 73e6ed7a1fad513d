use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mermin_lhv::exact::{int, rat};
use mermin_lhv::fixture::paper_fixture;
use mermin_lhv::mc::{run_with, RunConfig, Source};
use mermin_lhv::target::target_table_with;
use mermin_lhv::{Execution, Mode, ProblemTemplate, ScenarioParams};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn monte_carlo(c: &mut Criterion) {
    let params = ScenarioParams::new(4, rat(2, 3), int(1)).unwrap();
    let config = RunConfig::new(Source::Quantum(params), 1 << 18, 3).unwrap();
    let mut group = c.benchmark_group("monte_carlo_n4");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_with(&config, exec).unwrap())
        });
    }
    group.finish();
}

fn template_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("template_n4");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| ProblemTemplate::new_with(4, Mode::Full, exec).unwrap())
        });
    }
    group.finish();
}

fn statistics(c: &mut Criterion) {
    let model = paper_fixture(4).unwrap().model;
    let params = ScenarioParams::new(6, rat(3, 5), int(1)).unwrap();
    let mut group = c.benchmark_group("statistics");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new("fixture_n4", name), |b| {
            b.iter(|| model.model_statistics_with(exec))
        });
        group.bench_function(BenchmarkId::new("target_n6", name), |b| {
            b.iter(|| target_table_with(&params, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, template_build, statistics);
criterion_main!(benches);
