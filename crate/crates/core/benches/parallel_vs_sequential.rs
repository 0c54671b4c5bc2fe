use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gwca_core::ablation::evaluate_pairs;
use gwca_core::check::{run_checks, CheckConfig};
use gwca_core::synth::{generate_pairs, SynthConfig};
use gwca_core::{accumulate, solve, DistanceMode, Graph, OrderConfig};

fn pairs(count: usize) -> Vec<(Graph, Graph)> {
    let cfg = SynthConfig { pairs: count, noise: 0.1, seed: 1, ..Default::default() };
    generate_pairs(&cfg).unwrap().pairs.into_iter().map(|p| (p.view1, p.view2)).collect()
}

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let all = rayon::current_num_threads();
    let mut out = vec![("1-thread".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    if all > 1 {
        out.push((format!("{all}-threads"), rayon::ThreadPoolBuilder::new().num_threads(all).build().unwrap()));
    }
    out
}

fn bench(c: &mut Criterion) {
    let train = pairs(400);
    let test = pairs(200);
    let model = solve(&accumulate(&train, OrderConfig::default()).unwrap(), 1e-6, None).unwrap();
    let check_cfg = CheckConfig { trials: 20, ..Default::default() };

    let mut group = c.benchmark_group("accumulate");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            pool.install(|| b.iter(|| accumulate(&train, OrderConfig::default()).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("evaluate");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            pool.install(|| b.iter(|| evaluate_pairs(&model, &test, DistanceMode::W2, &[1, 5, 10]).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("check");
    group.sample_size(10);
    for (name, pool) in pools() {
        group
            .bench_function(BenchmarkId::from_parameter(&name), |b| pool.install(|| b.iter(|| run_checks(&check_cfg))));
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
