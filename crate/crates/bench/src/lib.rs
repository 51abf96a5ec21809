//! Fixtures shared by the kernel benchmarks.

use gmbclust::chordal::{random_decomposable_graph, DecomposableGraph};
use gmbclust::simulate::generate_scenario;
use gmbclust::{CategoricalDataset, ChainRng, ClusterSuffStats, HyperDirichletSpec, ScenarioSpec};
use rand::SeedableRng;

/// Two-cluster synthetic data with `q` binary variables and `n_k` rows per cluster.
pub fn scenario_data(q: usize, n_k: usize, seed: u64) -> CategoricalDataset {
    generate_scenario(&ScenarioSpec::scenario1(q, n_k, seed))
        .expect("valid scenario")
        .0
}

/// Sufficient statistics of all rows of `ds` under a random decomposable
/// graph with `edges` edges.
pub fn loaded_stats(ds: &CategoricalDataset, edges: usize, seed: u64) -> ClusterSuffStats {
    let mut rng = ChainRng::seed_from_u64(seed);
    let g = random_decomposable_graph(ds.q(), edges, &mut rng).expect("edge count fits");
    let graph = DecomposableGraph::new(g).expect("decomposable");
    let mut stats =
        ClusterSuffStats::new(graph, ds.levels(), &HyperDirichletSpec::default()).expect("stats");
    for row in ds.rows() {
        stats.add_row(row);
    }
    stats
}
