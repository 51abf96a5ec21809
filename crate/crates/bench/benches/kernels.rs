use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use gmbclust::chordal::enumerate_valid_moves;
use gmbclust::predictive::log_posterior_predictive;
use gmbclust::sampler::{graph_mh_step, sweep, MoveCounters};
use gmbclust::{ChainRng, ClusterState, GraphPriorSpec, HyperDirichletSpec, SamplerConfig};
use gmbclust_bench::{loaded_stats, scenario_data};
use rand::SeedableRng;

fn predictive(c: &mut Criterion) {
    let ds = scenario_data(20, 200, 1);
    let stats = loaded_stats(&ds, 20, 2);
    let hyper = HyperDirichletSpec::default();
    let x = ds.row(0).to_vec();
    c.bench_function("posterior_predictive_q20", |b| {
        b.iter(|| log_posterior_predictive(&x, &stats, &hyper, false).unwrap())
    });
}

fn moves(c: &mut Criterion) {
    let ds = scenario_data(20, 200, 1);
    let stats = loaded_stats(&ds, 20, 2);
    let graph = stats.graph().clone();
    c.bench_function("enumerate_moves_q20", |b| {
        b.iter(|| enumerate_valid_moves(graph.graph()).unwrap().len())
    });

    let rows: Vec<usize> = (0..ds.n()).collect();
    let hyper = HyperDirichletSpec::default();
    let prior = GraphPriorSpec::default();
    let mut rng = ChainRng::seed_from_u64(3);
    c.bench_function("graph_mh_step_q20_n400", |b| {
        b.iter(|| graph_mh_step(&graph, &ds, &rows, &hyper, &prior, &mut rng).unwrap())
    });
}

fn full_sweep(c: &mut Criterion) {
    let ds = scenario_data(10, 100, 1);
    let cfg = SamplerConfig::default();
    let mut rng = ChainRng::seed_from_u64(4);
    let mut state = ClusterState::initial(&ds, &cfg).unwrap();
    for _ in 0..50 {
        sweep(&mut state, &ds, &cfg, &mut MoveCounters::default(), &mut rng).unwrap();
    }
    c.bench_function("sweep_q10_n200", |b| {
        b.iter_batched(
            || state.clone(),
            |mut s| {
                sweep(&mut s, &ds, &cfg, &mut MoveCounters::default(), &mut rng).unwrap();
                s
            },
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, predictive, moves, full_sweep);
criterion_main!(benches);
