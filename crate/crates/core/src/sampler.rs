//! Partially collapsed Gibbs sampler over cluster indicators, per-cluster
//! decomposable graphs and the DP concentration parameter.
//!
//! One sweep runs three steps:
//!
//! 1. reassign every row given all others (auxiliary-component scheme for
//!    opening new clusters, whose graphs are drawn from the graph prior);
//! 2. one Metropolis-Hastings single-edge move per cluster graph, proposed
//!    uniformly among the moves that keep the graph decomposable;
//! 3. refresh `α` with the auxiliary-variable Gamma-mixture update.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::chordal::{
    count_valid_moves, is_decomposable, valid_moves, DecomposableGraph, GraphMove, MoveKind,
    UndirectedGraph,
};
use crate::data::CategoricalDataset;
use crate::predictive::{log_marginal_rows, log_prior_predictive, ClusterSuffStats};
use crate::priors::{log_graph_prior, ConcentrationPriorSpec, GraphPriorSpec, HyperDirichletSpec};
use crate::{ChainRng, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Auxiliary components offered for a new cluster at each reassignment.
    pub aux_components: usize,
    /// Pin every cluster graph to the empty graph (DP mixture of independent
    /// multinomials).
    pub baseline_mode: bool,
    pub hyper: HyperDirichletSpec,
    pub graph_prior: GraphPriorSpec,
    pub concentration: ConcentrationPriorSpec,
    /// Log progress every this many sweeps; 0 disables.
    pub progress_every: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            burn_in: 200,
            thin: 1,
            seed: 0,
            aux_components: 1,
            baseline_mode: false,
            hyper: HyperDirichletSpec::default(),
            graph_prior: GraphPriorSpec::default(),
            concentration: ConcentrationPriorSpec::default(),
            progress_every: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.aux_components == 0 {
            return Err(Error::Config("aux_components must be at least 1".into()));
        }
        HyperDirichletSpec::new(self.hyper.a)?;
        GraphPriorSpec::new(self.graph_prior.a_g, self.graph_prior.b_g)?;
        ConcentrationPriorSpec::new(self.concentration.c, self.concentration.d)?;
        Ok(())
    }

    /// Number of draws `run` will save.
    pub fn saved_draws(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

#[derive(Debug, Clone)]
struct Cluster {
    stats: ClusterSuffStats,
    members: Vec<usize>,
}

impl Cluster {
    fn graph(&self) -> &DecomposableGraph {
        self.stats.graph()
    }
}

/// Current partition, cluster graphs with their sufficient statistics, and `α`.
#[derive(Debug, Clone)]
pub struct ClusterState {
    assignments: Vec<usize>,
    clusters: Vec<Cluster>,
    alpha: f64,
}

impl ClusterState {
    /// All rows in one cluster with the empty graph, `α` at its prior mean.
    pub fn initial(dataset: &CategoricalDataset, config: &SamplerConfig) -> Result<Self> {
        let rows: Vec<usize> = (0..dataset.n()).collect();
        let graph = DecomposableGraph::empty(dataset.q())?;
        let stats = ClusterSuffStats::from_rows(graph, dataset, &rows, &config.hyper)?;
        Ok(Self {
            assignments: vec![0; dataset.n()],
            clusters: vec![Cluster {
                stats,
                members: rows,
            }],
            alpha: config.concentration.mean(),
        })
    }

    /// State with the given cluster indices (`0..K`, every cluster non-empty)
    /// and one graph per cluster.
    pub fn from_parts(
        dataset: &CategoricalDataset,
        assignments: Vec<usize>,
        graphs: Vec<UndirectedGraph>,
        alpha: f64,
        hyper: &HyperDirichletSpec,
    ) -> Result<Self> {
        if assignments.len() != dataset.n() {
            return Err(Error::Validation(format!(
                "{} assignments for {} rows",
                assignments.len(),
                dataset.n()
            )));
        }
        let mut members = vec![Vec::new(); graphs.len()];
        for (i, &k) in assignments.iter().enumerate() {
            members
                .get_mut(k)
                .ok_or_else(|| Error::Bounds(format!("cluster {k} >= K = {}", graphs.len())))?
                .push(i);
        }
        let clusters = graphs
            .into_iter()
            .zip(members)
            .map(|(g, m)| {
                if m.is_empty() {
                    return Err(Error::Validation("empty cluster".into()));
                }
                let stats =
                    ClusterSuffStats::from_rows(DecomposableGraph::new(g)?, dataset, &m, hyper)?;
                Ok(Cluster { stats, members: m })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            assignments,
            clusters,
            alpha,
        })
    }

    /// `K`, the number of non-empty clusters.
    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
    }

    /// Internal cluster index of every row.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.members.len()).collect()
    }

    pub fn graph(&self, k: usize) -> &UndirectedGraph {
        self.clusters[k].graph().graph()
    }

    pub fn stats(&self, k: usize) -> &ClusterSuffStats {
        &self.clusters[k].stats
    }

    /// Checks every structural invariant, including a full recount of the
    /// sufficient statistics.
    pub fn check_consistency(&self, dataset: &CategoricalDataset) -> Result<()> {
        if self.assignments.len() != dataset.n() {
            return Err(Error::State("assignment vector length differs from n".into()));
        }
        let mut total = 0;
        for (k, c) in self.clusters.iter().enumerate() {
            if c.members.is_empty() {
                return Err(Error::State(format!("cluster {k} is empty")));
            }
            if c.members.iter().any(|&i| self.assignments[i] != k) {
                return Err(Error::State(format!("cluster {k} member list disagrees")));
            }
            let mut sorted = c.members.clone();
            sorted.sort_unstable();
            if !c.stats.matches_recount(dataset, &sorted)? {
                return Err(Error::State(format!("cluster {k} counts differ from recount")));
            }
            total += c.members.len();
        }
        if total != dataset.n() {
            return Err(Error::State(format!(
                "cluster sizes sum to {total}, expected {}",
                dataset.n()
            )));
        }
        Ok(())
    }

    /// Canonical labels `1..=K` (clusters ordered by smallest member) and the
    /// graphs in the same order.
    pub fn canonical(&self) -> (Vec<usize>, Vec<&UndirectedGraph>) {
        let mut relabel = vec![usize::MAX; self.clusters.len()];
        let mut order = Vec::with_capacity(self.clusters.len());
        let labels = self
            .assignments
            .iter()
            .map(|&k| {
                if relabel[k] == usize::MAX {
                    relabel[k] = order.len() + 1;
                    order.push(k);
                }
                relabel[k]
            })
            .collect();
        (labels, order.iter().map(|&k| self.graph(k)).collect())
    }

    fn detach(&mut self, i: usize, dataset: &CategoricalDataset) -> Result<()> {
        let k = self.assignments[i];
        let cluster = &mut self.clusters[k];
        cluster.stats.remove_row(dataset.row(i))?;
        let pos = cluster
            .members
            .iter()
            .position(|&m| m == i)
            .ok_or_else(|| Error::State(format!("row {i} missing from cluster {k}")))?;
        cluster.members.swap_remove(pos);
        if cluster.members.is_empty() {
            self.clusters.swap_remove(k);
            if k < self.clusters.len() {
                for &m in &self.clusters[k].members {
                    self.assignments[m] = k;
                }
            }
        }
        self.assignments[i] = usize::MAX;
        Ok(())
    }

    fn attach(&mut self, i: usize, k: usize, dataset: &CategoricalDataset) {
        let cluster = &mut self.clusters[k];
        cluster.stats.add_row(dataset.row(i));
        cluster.members.push(i);
        self.assignments[i] = k;
    }
}

/// Index drawn proportionally to `exp(log_weights)`.
fn sample_log_weights<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> usize {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, w) in weights.iter().enumerate() {
        if u < *w {
            return k;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Draw from the graph prior restricted to decomposable graphs: `π ~ Beta(a_g, b_g)`,
/// independent `Bernoulli(π)` edges, whole draw repeated until decomposable.
pub fn sample_graph_from_prior<R: Rng + ?Sized>(
    q: usize,
    spec: &GraphPriorSpec,
    rng: &mut R,
) -> Result<UndirectedGraph> {
    let mut g = UndirectedGraph::empty(q)?;
    if q <= 1 {
        return Ok(g);
    }
    let beta = Beta::new(spec.a_g, spec.b_g)
        .map_err(|e| Error::Config(format!("graph prior: {e}")))?;
    let cap = 10 * q * q;
    for _ in 0..cap {
        let pi: f64 = beta.sample(rng);
        g = UndirectedGraph::empty(q)?;
        for u in 0..q {
            for v in u + 1..q {
                if rng.random::<f64>() < pi {
                    g.add_edge(u, v);
                }
            }
        }
        if is_decomposable(&g) {
            return Ok(g);
        }
    }
    Err(Error::Numeric(format!(
        "no decomposable graph after {cap} prior draws on {q} vertices; \
         lower a_g/(a_g+b_g) to favour sparser graphs"
    )))
}

/// Step 1: reassign every row in turn.
pub fn update_assignments<R: Rng + ?Sized>(
    state: &mut ClusterState,
    dataset: &CategoricalDataset,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<()> {
    let m = config.aux_components;
    let q = dataset.q();
    let empty = DecomposableGraph::empty(q)?;
    let log_aux_mass = (state.alpha / m as f64).ln();
    let mut log_w = Vec::with_capacity(state.k() + m);
    for i in 0..dataset.n() {
        state.detach(i, dataset)?;
        let x = dataset.row(i);
        log_w.clear();
        for c in &state.clusters {
            log_w.push(
                (c.members.len() as f64).ln()
                    + c.stats.log_posterior_predictive(x, &config.hyper, false)?,
            );
        }
        // With a^S = a/|𝒳_S| the prior predictive equals 1/|𝒳| for every
        // decomposable graph, so all auxiliary weights coincide and the
        // chosen auxiliary graph can be drawn after the selection.
        let log_new = log_aux_mass + log_prior_predictive(x, &empty, &config.hyper, dataset.levels());
        log_w.extend(std::iter::repeat_n(log_new, m));
        if let Some(bad) = log_w.iter().position(|w| !w.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite assignment weight {} for row {i} (option {bad}); alpha = {}, cluster sizes = {:?}",
                log_w[bad],
                state.alpha,
                state.cluster_sizes()
            )));
        }
        let choice = sample_log_weights(&log_w, rng);
        if choice < state.k() {
            state.attach(i, choice, dataset);
        } else {
            let graph = if config.baseline_mode {
                empty.clone()
            } else {
                DecomposableGraph::new(sample_graph_from_prior(q, &config.graph_prior, rng)?)?
            };
            let stats = ClusterSuffStats::new(graph, dataset.levels(), &config.hyper)?;
            state.clusters.push(Cluster {
                stats,
                members: Vec::new(),
            });
            let k = state.k() - 1;
            state.attach(i, k, dataset);
        }
    }
    Ok(())
}

/// Change in `log m(X | 𝒢)` caused by a valid single-edge move.
///
/// Only the clique containing both endpoints changes: with `W` the common
/// neighbours of `u` and `v`, inserting `u-v` multiplies the marginal by
/// `m(W∪{u,v}) m(W) / (m(W∪{u}) m(W∪{v}))`; deletion divides by it.
pub fn log_marginal_delta(
    graph: &UndirectedGraph,
    mv: GraphMove,
    dataset: &CategoricalDataset,
    rows: &[usize],
    hyper: &HyperDirichletSpec,
) -> Result<f64> {
    let common = graph.neighbor_mask(mv.u) & graph.neighbor_mask(mv.v);
    let with = |extra: &[usize]| -> Vec<usize> {
        let mask = extra.iter().fold(common, |m, &v| m | (1u64 << v));
        (0..graph.q()).filter(|&v| mask & (1u64 << v) != 0).collect()
    };
    let joint = log_marginal_rows(dataset, rows, &with(&[mv.u, mv.v]), hyper)?;
    let sep = log_marginal_rows(dataset, rows, &with(&[]), hyper)?;
    let left = log_marginal_rows(dataset, rows, &with(&[mv.u]), hyper)?;
    let right = log_marginal_rows(dataset, rows, &with(&[mv.v]), hyper)?;
    let gain = joint + sep - left - right;
    Ok(match mv.kind {
        MoveKind::Insertion => gain,
        MoveKind::Deletion => -gain,
    })
}

/// One MH move on a cluster graph given the rows assigned to it. Returns the
/// new graph when the proposal is accepted.
pub fn graph_mh_step<R: Rng + ?Sized>(
    graph: &DecomposableGraph,
    dataset: &CategoricalDataset,
    rows: &[usize],
    hyper: &HyperDirichletSpec,
    prior: &GraphPriorSpec,
    rng: &mut R,
) -> Result<Option<DecomposableGraph>> {
    let current = graph.graph();
    let moves = valid_moves(current);
    if moves.is_empty() {
        return Ok(None);
    }
    let mv = moves[rng.random_range(0..moves.len())];
    let mut proposed = current.clone();
    proposed.toggle_edge(mv.u, mv.v);
    let reverse_options = count_valid_moves(&proposed);
    let log_ratio = log_marginal_delta(current, mv, dataset, rows, hyper)?
        + log_graph_prior(&proposed, prior)
        - log_graph_prior(current, prior)
        + (moves.len() as f64).ln()
        - (reverse_options as f64).ln();
    if !log_ratio.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite MH log ratio {log_ratio} for {mv:?}"
        )));
    }
    if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
        Ok(Some(DecomposableGraph::new(proposed)?))
    } else {
        Ok(None)
    }
}

/// Graph move bookkeeping across a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveCounters {
    pub proposed: u64,
    pub accepted: u64,
}

/// Step 2: one MH move per cluster graph. No-op in baseline mode.
pub fn update_graphs<R: Rng + ?Sized>(
    state: &mut ClusterState,
    dataset: &CategoricalDataset,
    config: &SamplerConfig,
    counters: &mut MoveCounters,
    rng: &mut R,
) -> Result<()> {
    if config.baseline_mode {
        return Ok(());
    }
    for cluster in &mut state.clusters {
        let proposal = graph_mh_step(
            cluster.graph(),
            dataset,
            &cluster.members,
            &config.hyper,
            &config.graph_prior,
            rng,
        )?;
        if cluster.graph().q() > 1 {
            counters.proposed += 1;
        }
        if let Some(graph) = proposal {
            counters.accepted += 1;
            cluster.stats =
                ClusterSuffStats::from_rows(graph, dataset, &cluster.members, &config.hyper)?;
        }
    }
    Ok(())
}

/// Mixing weight `g` of the `Gamma(c+K, d - log η)` component, from
/// `g / (1 - g) = (c + K - 1) / (n (d - log η))`.
pub fn alpha_mixture_weight(spec: &ConcentrationPriorSpec, k: usize, n: usize, eta: f64) -> f64 {
    let odds = (spec.c + k as f64 - 1.0) / (n as f64 * (spec.d - eta.ln()));
    odds / (1.0 + odds)
}

/// One auxiliary-variable update of `α` given `K` clusters among `n` rows.
pub fn sample_alpha<R: Rng + ?Sized>(
    alpha: f64,
    k: usize,
    n: usize,
    spec: &ConcentrationPriorSpec,
    rng: &mut R,
) -> Result<f64> {
    let eta: f64 = Beta::new(alpha + 1.0, n as f64)
        .map_err(|e| Error::Numeric(format!("eta ~ Beta({}, {n}): {e}", alpha + 1.0)))?
        .sample(rng);
    // Guard against η underflowing to exactly 0 for very small α.
    let eta = eta.max(f64::MIN_POSITIVE);
    let rate = spec.d - eta.ln();
    let g = alpha_mixture_weight(spec, k, n, eta);
    let shape = if rng.random::<f64>() < g {
        spec.c + k as f64
    } else {
        spec.c + k as f64 - 1.0
    };
    let draw: f64 = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| Error::Numeric(format!("alpha ~ Gamma({shape}, {rate}): {e}")))?
        .sample(rng);
    // Gamma draws can underflow to 0 for tiny shapes; α must stay positive.
    Ok(draw.max(f64::MIN_POSITIVE))
}

/// Step 3.
pub fn update_alpha<R: Rng + ?Sized>(
    state: &mut ClusterState,
    n: usize,
    spec: &ConcentrationPriorSpec,
    rng: &mut R,
) -> Result<()> {
    state.alpha = sample_alpha(state.alpha, state.k(), n, spec, rng)?;
    Ok(())
}

/// One saved draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub iter: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub alpha: f64,
    /// Canonical labels `1..=K`.
    pub assignments: Vec<usize>,
    /// Edge lists of the `K` graphs, in label order.
    pub graphs: Vec<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub n: usize,
    pub q: usize,
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub baseline_mode: bool,
    pub graph_moves: MoveCounters,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub draws: Vec<Draw>,
    pub meta: TraceMetadata,
}

#[derive(Serialize, Deserialize)]
struct MetadataLine {
    metadata: TraceMetadata,
}

impl Trace {
    pub fn n(&self) -> usize {
        self.meta.n
    }

    pub fn q(&self) -> usize {
        self.meta.q
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// JSON lines: one object per draw, then `{"metadata": {...}}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for d in &self.draws {
            serde_json::to_writer(&mut out, d)?;
            out.write_all(b"\n")?;
        }
        serde_json::to_writer(
            &mut out,
            &MetadataLine {
                metadata: self.meta.clone(),
            },
        )?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut draws = Vec::new();
        let mut meta = None;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if meta.is_some() {
                return Err(Error::Parse {
                    row: lineno + 1,
                    msg: "content after the metadata line".into(),
                });
            }
            let value: serde_json::Value = serde_json::from_str(&line)?;
            if value.get("metadata").is_some() {
                meta = Some(serde_json::from_value::<MetadataLine>(value)?.metadata);
            } else {
                draws.push(serde_json::from_value::<Draw>(value)?);
            }
        }
        let meta = meta.ok_or(Error::Parse {
            row: 0,
            msg: "trace has no metadata line".into(),
        })?;
        let trace = Self { draws, meta };
        trace.validate()?;
        Ok(trace)
    }

    pub fn read_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::read_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn write_path(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_jsonl(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Every draw has `n` labels in `1..=K` and `K` graphs on `q` vertices.
    pub fn validate(&self) -> Result<()> {
        for d in &self.draws {
            let bad = |msg: String| Error::Validation(format!("draw at iter {}: {msg}", d.iter));
            if d.assignments.len() != self.meta.n {
                return Err(bad(format!("{} assignments, n = {}", d.assignments.len(), self.meta.n)));
            }
            if d.graphs.len() != d.k {
                return Err(bad(format!("{} graphs for K = {}", d.graphs.len(), d.k)));
            }
            if d.assignments.iter().any(|&l| l == 0 || l > d.k) {
                return Err(bad("label outside 1..=K".into()));
            }
            if d.graphs
                .iter()
                .flatten()
                .any(|e| e[0] >= self.meta.q || e[1] >= self.meta.q || e[0] == e[1])
            {
                return Err(bad("edge outside the vertex set".into()));
            }
            if !(d.alpha > 0.0) {
                return Err(bad(format!("alpha = {}", d.alpha)));
            }
        }
        Ok(())
    }

    /// Concatenates the draws of several chains over the same data.
    pub fn merge(traces: &[Trace]) -> Result<Trace> {
        let first = traces
            .first()
            .ok_or_else(|| Error::Validation("no traces to merge".into()))?;
        let mut meta = first.meta.clone();
        let mut draws = Vec::new();
        meta.graph_moves = MoveCounters::default();
        for t in traces {
            if t.meta.n != meta.n || t.meta.q != meta.q {
                return Err(Error::Validation(format!(
                    "trace over n={}, q={} cannot merge with n={}, q={}",
                    t.meta.n, t.meta.q, meta.n, meta.q
                )));
            }
            draws.extend(t.draws.iter().cloned());
            meta.graph_moves.proposed += t.meta.graph_moves.proposed;
            meta.graph_moves.accepted += t.meta.graph_moves.accepted;
        }
        meta.acceptance_rate = rate(meta.graph_moves);
        Ok(Trace { draws, meta })
    }
}

fn rate(c: MoveCounters) -> f64 {
    if c.proposed == 0 {
        0.0
    } else {
        c.accepted as f64 / c.proposed as f64
    }
}

/// One full sweep of the three steps.
pub fn sweep<R: Rng + ?Sized>(
    state: &mut ClusterState,
    dataset: &CategoricalDataset,
    config: &SamplerConfig,
    counters: &mut MoveCounters,
    rng: &mut R,
) -> Result<()> {
    update_assignments(state, dataset, config, rng)?;
    update_graphs(state, dataset, config, counters, rng)?;
    update_alpha(state, dataset.n(), &config.concentration, rng)?;
    #[cfg(debug_assertions)]
    state.check_consistency(dataset)?;
    Ok(())
}

/// Runs one chain from the single-cluster, empty-graph start.
pub fn run(dataset: &CategoricalDataset, config: &SamplerConfig) -> Result<Trace> {
    config.validate()?;
    let mut rng = ChainRng::seed_from_u64(config.seed);
    let mut state = ClusterState::initial(dataset, config)?;
    let mut counters = MoveCounters::default();
    let mut draws = Vec::with_capacity(config.saved_draws());
    for t in 1..=config.iterations {
        sweep(&mut state, dataset, config, &mut counters, &mut rng).map_err(|e| match e {
            Error::Numeric(msg) => Error::Numeric(format!("sweep {t}: {msg}")),
            other => other,
        })?;
        if t > config.burn_in && (t - config.burn_in) % config.thin == 0 {
            let (assignments, graphs) = state.canonical();
            draws.push(Draw {
                iter: t,
                k: state.k(),
                alpha: state.alpha,
                assignments,
                graphs: graphs
                    .into_iter()
                    .map(|g| g.edges().into_iter().map(|(u, v)| [u, v]).collect())
                    .collect(),
            });
        }
        if config.progress_every > 0 && t % config.progress_every == 0 {
            log::info!(
                "seed {} sweep {t}/{}: K = {}, alpha = {:.3}, graph acceptance = {:.3}",
                config.seed,
                config.iterations,
                state.k(),
                state.alpha,
                rate(counters)
            );
        }
    }
    Ok(Trace {
        draws,
        meta: TraceMetadata {
            n: dataset.n(),
            q: dataset.q(),
            seed: config.seed,
            iterations: config.iterations,
            burn_in: config.burn_in,
            thin: config.thin,
            baseline_mode: config.baseline_mode,
            graph_moves: counters,
            acceptance_rate: rate(counters),
        },
    })
}
