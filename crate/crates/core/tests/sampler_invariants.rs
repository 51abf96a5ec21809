use gmbclust::chordal::{is_valid_move, random_decomposable_graph, DecomposableGraph, GraphMove};
use gmbclust::predictive::log_posterior_predictive;
use gmbclust::sampler::{graph_mh_step, sample_graph_from_prior, sweep, MoveCounters};
use gmbclust::{
    CategoricalDataset, ChainRng, ClusterState, ClusterSuffStats, GraphPriorSpec,
    HyperDirichletSpec, SamplerConfig, UndirectedGraph,
};
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Gamma};

fn graph_index(g: &UndirectedGraph) -> usize {
    let mut idx = 0;
    let mut bit = 0;
    for u in 0..g.q() {
        for v in u + 1..g.q() {
            if g.has_edge(u, v) {
                idx |= 1 << bit;
            }
            bit += 1;
        }
    }
    idx
}

#[test]
fn uniform_prior_without_data_gives_uniform_graphs() {
    // Beta(a, a) with huge a pins π at 1/2, which is uniform over graphs;
    // with no rows the marginal ratio is 1.
    let ds = CategoricalDataset::from_codes(&[2, 2, 2], vec![vec![0, 0, 0]]).unwrap();
    let prior = GraphPriorSpec::new(1e7, 1e7).unwrap();
    let hyper = HyperDirichletSpec::default();
    let mut rng = ChainRng::seed_from_u64(31);
    let mut g = DecomposableGraph::empty(3).unwrap();
    let steps = 100_000;
    let mut freq = [0usize; 8];
    for _ in 0..steps {
        if let Some(next) = graph_mh_step(&g, &ds, &[], &hyper, &prior, &mut rng).unwrap() {
            g = next;
        }
        freq[graph_index(g.graph())] += 1;
    }
    let tv: f64 = 0.5 * freq.iter().map(|&f| (f as f64 / steps as f64 - 0.125).abs()).sum::<f64>();
    assert!(tv < 0.03, "TV = {tv}, freq = {freq:?}");
}

#[test]
fn single_vertex_graphs_never_move() {
    let ds = CategoricalDataset::from_codes(&[3], vec![vec![0], vec![2]]).unwrap();
    let mut rng = ChainRng::seed_from_u64(2);
    let g = DecomposableGraph::empty(1).unwrap();
    for _ in 0..20 {
        let step = graph_mh_step(
            &g,
            &ds,
            &[0, 1],
            &HyperDirichletSpec::default(),
            &GraphPriorSpec::default(),
            &mut rng,
        )
        .unwrap();
        assert!(step.is_none());
    }
}

#[test]
fn accepted_moves_are_reversible() {
    let mut rng = ChainRng::seed_from_u64(77);
    let levels = [2usize; 6];
    let rows: Vec<Vec<u16>> = (0..40)
        .map(|_| levels.iter().map(|_| rng.random_range(0..2)).collect())
        .collect();
    let ds = CategoricalDataset::from_codes(&levels, rows).unwrap();
    let members: Vec<usize> = (0..40).collect();
    let mut g = DecomposableGraph::new(random_decomposable_graph(6, 5, &mut rng).unwrap()).unwrap();
    let mut accepted = 0;
    for _ in 0..2000 {
        let before = g.graph().clone();
        if let Some(next) = graph_mh_step(
            &g,
            &ds,
            &members,
            &HyperDirichletSpec::default(),
            &GraphPriorSpec::default(),
            &mut rng,
        )
        .unwrap()
        {
            let (u, v) = before
                .edges()
                .into_iter()
                .chain(next.graph().edges())
                .find(|&(u, v)| before.has_edge(u, v) != next.graph().has_edge(u, v))
                .unwrap();
            assert_eq!(before.hamming(next.graph()), 1);
            let back = if next.graph().has_edge(u, v) {
                GraphMove::deletion(u, v)
            } else {
                GraphMove::insertion(u, v)
            };
            assert!(is_valid_move(next.graph(), back));
            g = next;
            accepted += 1;
        }
    }
    assert!(accepted > 0);
}

/// Baseline clusters have empty graphs, so reassignment weights are those
/// of a DP mixture of independent multinomials.
#[test]
fn baseline_predictive_is_product_multinomial() {
    let hyper = HyperDirichletSpec::default();
    let levels = [3usize, 2];
    let rows = vec![vec![0u16, 1], vec![2, 1], vec![0, 0], vec![1, 1], vec![0, 1]];
    let ds = CategoricalDataset::from_codes(&levels, rows.clone()).unwrap();
    let cfg = SamplerConfig {
        baseline_mode: true,
        iterations: 5,
        burn_in: 0,
        ..SamplerConfig::default()
    };
    let mut state = ClusterState::initial(&ds, &cfg).unwrap();
    let mut rng = ChainRng::seed_from_u64(4);
    for _ in 0..30 {
        sweep(&mut state, &ds, &cfg, &mut MoveCounters::default(), &mut rng).unwrap();
        for k in 0..state.k() {
            assert_eq!(state.graph(k).edge_count(), 0);
            let members: Vec<&Vec<u16>> = rows
                .iter()
                .enumerate()
                .filter(|(i, _)| state.assignments()[*i] == k)
                .map(|(_, r)| r)
                .collect();
            let stats = state.stats(k);
            let x = [1u16, 0];
            let direct: f64 = (0..2)
                .map(|j| {
                    let c = members.iter().filter(|r| r[j] == x[j]).count() as f64;
                    (hyper.a / levels[j] as f64 + c) / (hyper.a + members.len() as f64)
                })
                .product();
            let got = log_posterior_predictive(&x, stats, &hyper, false).unwrap().exp();
            assert!((got - direct).abs() < 1e-14);
        }
    }
}

// ------------------------------------------------------------------ Geweke

const Q: usize = 3;
const N: usize = 4;

struct Params {
    labels: Vec<usize>,
    graphs: Vec<UndirectedGraph>,
    alpha: f64,
}

fn stats_of(p: &Params) -> [f64; 3] {
    [
        p.graphs.len() as f64,
        p.graphs[p.labels[0]].edge_count() as f64,
        p.alpha,
    ]
}

fn prior_draw(cfg: &SamplerConfig, rng: &mut ChainRng) -> Params {
    let alpha: f64 = Gamma::new(cfg.concentration.c, 1.0 / cfg.concentration.d)
        .unwrap()
        .sample(rng);
    let mut labels = Vec::with_capacity(N);
    let mut sizes: Vec<usize> = Vec::new();
    for i in 0..N {
        let u = rng.random::<f64>() * (i as f64 + alpha);
        let mut acc = 0.0;
        let mut choice = sizes.len();
        for (k, &s) in sizes.iter().enumerate() {
            acc += s as f64;
            if u < acc {
                choice = k;
                break;
            }
        }
        if choice == sizes.len() {
            sizes.push(0);
        }
        sizes[choice] += 1;
        labels.push(choice);
    }
    let graphs = sizes
        .iter()
        .map(|_| sample_graph_from_prior(Q, &cfg.graph_prior, rng).unwrap())
        .collect();
    Params {
        labels,
        graphs,
        alpha,
    }
}

/// Rows drawn cluster by cluster from the sequential predictive, which
/// integrates the cell probabilities out exactly.
fn generate_data(p: &Params, hyper: &HyperDirichletSpec, rng: &mut ChainRng) -> CategoricalDataset {
    let levels = [2usize; Q];
    let configs: Vec<Vec<u16>> = (0..1u16 << Q)
        .map(|m| (0..Q).map(|j| (m >> j) & 1).collect())
        .collect();
    let mut stats: Vec<ClusterSuffStats> = p
        .graphs
        .iter()
        .map(|g| ClusterSuffStats::new(DecomposableGraph::new(g.clone()).unwrap(), &levels, hyper).unwrap())
        .collect();
    let mut rows = Vec::with_capacity(N);
    for &k in &p.labels {
        let probs: Vec<f64> = configs
            .iter()
            .map(|x| log_posterior_predictive(x, &stats[k], hyper, false).unwrap().exp())
            .collect();
        let mut u = rng.random::<f64>() * probs.iter().sum::<f64>();
        let mut pick = configs.len() - 1;
        for (c, &pr) in probs.iter().enumerate() {
            if u < pr {
                pick = c;
                break;
            }
            u -= pr;
        }
        stats[k].add_row(&configs[pick]);
        rows.push(configs[pick].clone());
    }
    CategoricalDataset::from_codes(&levels, rows).unwrap()
}

/// Asymptotic two-sample Kolmogorov-Smirnov p-value.
fn ks_pvalue(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    p.clamp(0.0, 1.0)
}

#[test]
fn geweke_joint_distribution_test() {
    let cfg = SamplerConfig {
        iterations: 1,
        burn_in: 0,
        ..SamplerConfig::default()
    };
    let samples = 20_000;
    let thin = 10;
    let mut rng = ChainRng::seed_from_u64(2024);

    let marginal: Vec<[f64; 3]> = (0..samples).map(|_| stats_of(&prior_draw(&cfg, &mut rng))).collect();

    let start = prior_draw(&cfg, &mut rng);
    let mut ds = generate_data(&start, &cfg.hyper, &mut rng);
    let mut state =
        ClusterState::from_parts(&ds, start.labels, start.graphs, start.alpha, &cfg.hyper).unwrap();
    let mut counters = MoveCounters::default();
    let mut successive = Vec::with_capacity(samples);
    for t in 0..samples * thin {
        sweep(&mut state, &ds, &cfg, &mut counters, &mut rng).unwrap();
        let p = Params {
            labels: state.assignments().to_vec(),
            graphs: (0..state.k()).map(|k| state.graph(k).clone()).collect(),
            alpha: state.alpha(),
        };
        ds = generate_data(&p, &cfg.hyper, &mut rng);
        state = ClusterState::from_parts(&ds, p.labels.clone(), p.graphs.clone(), p.alpha, &cfg.hyper)
            .unwrap();
        if t % thin == thin - 1 {
            successive.push(stats_of(&p));
        }
    }

    for (s, name) in ["K", "|G| of row 1's cluster", "alpha"].iter().enumerate() {
        let a: Vec<f64> = marginal.iter().map(|v| v[s]).collect();
        let b: Vec<f64> = successive.iter().map(|v| v[s]).collect();
        let p = ks_pvalue(a.clone(), b.clone());
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            p > 0.01,
            "{name}: KS p = {p:.4}, means {:.4} vs {:.4}",
            mean(&a),
            mean(&b)
        );
    }
}
