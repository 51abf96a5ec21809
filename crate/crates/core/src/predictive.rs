//! Closed-form Hyper-Dirichlet marginal likelihoods and predictive
//! probabilities for a categorical decomposable graphical model.
//!
//! With `a^S_{x_S} = a / |𝒳_S|`, the marginal of the data restricted to `S` is
//! a Dirichlet-multinomial
//!
//! ```text
//! m(X_S) = Γ(a)/Γ(a+n) · Π_{x_S} Γ(a^S_{x_S} + n^S_{x_S}) / Γ(a^S_{x_S})
//! ```
//!
//! and the graph marginal is `Π_C m(X_C) / Π_S m(X_S)`, separators counted
//! with multiplicity. An empty separator has `m(X_∅) = 1` and `a^∅ = a`.

use statrs::function::gamma::ln_gamma;

use crate::chordal::DecomposableGraph;
use crate::data::{marginal_counts, CategoricalDataset, Code, MarginalCountTable};
use crate::priors::{hyperparameter, HyperDirichletSpec};
use crate::{Error, Result};

/// `log m(X_S)` for the counts in `table`.
pub fn log_marginal_subset(table: &MarginalCountTable, spec: &HyperDirichletSpec) -> f64 {
    if table.subset().is_empty() {
        return 0.0;
    }
    let a = spec.a;
    let cell = a / table.cell_count();
    let lg_cell = ln_gamma(cell);
    let cells: f64 = table
        .observed_counts()
        .into_iter()
        .map(|c| ln_gamma(cell + c as f64) - lg_cell)
        .sum();
    ln_gamma(a) - ln_gamma(a + table.total() as f64) + cells
}

/// `log m(X_S)` computed directly from dataset rows.
pub fn log_marginal_rows(
    dataset: &CategoricalDataset,
    rows: &[usize],
    subset: &[usize],
    spec: &HyperDirichletSpec,
) -> Result<f64> {
    Ok(log_marginal_subset(
        &marginal_counts(dataset, rows, subset)?,
        spec,
    ))
}

/// `log m(X | 𝒢)` for the selected rows.
pub fn log_marginal_graph(
    dataset: &CategoricalDataset,
    rows: &[usize],
    graph: &DecomposableGraph,
    spec: &HyperDirichletSpec,
) -> Result<f64> {
    let mut total = 0.0;
    for c in graph.cliques() {
        total += log_marginal_rows(dataset, rows, c, spec)?;
    }
    for s in graph.separators() {
        total -= log_marginal_rows(dataset, rows, s, spec)?;
    }
    Ok(total)
}

/// `log p(x | 𝒢)` for a new, empty cluster.
pub fn log_prior_predictive(
    x: &[Code],
    graph: &DecomposableGraph,
    spec: &HyperDirichletSpec,
    levels: &[usize],
) -> f64 {
    debug_assert_eq!(x.len(), levels.len());
    let cliques = graph.cliques();
    let seps = graph.separators();
    let excess = seps.len() as f64 - cliques.len() as f64;
    excess * spec.a.ln()
        + cliques
            .iter()
            .map(|c| hyperparameter(spec, levels, c).ln())
            .sum::<f64>()
        - seps
            .iter()
            .map(|s| hyperparameter(spec, levels, s).ln())
            .sum::<f64>()
}

#[derive(Debug, Clone)]
struct SubsetCounts {
    counts: MarginalCountTable,
    /// `a^S_{x_S}`, identical for every cell of the subset.
    cell_mass: f64,
}

/// Per-clique and per-separator count tables of the rows in one cluster,
/// maintained incrementally as rows join and leave.
#[derive(Debug, Clone)]
pub struct ClusterSuffStats {
    graph: DecomposableGraph,
    cliques: Vec<SubsetCounts>,
    separators: Vec<SubsetCounts>,
    size: usize,
}

impl ClusterSuffStats {
    pub fn new(graph: DecomposableGraph, levels: &[usize], spec: &HyperDirichletSpec) -> Result<Self> {
        let build = |s: &Vec<usize>| -> Result<SubsetCounts> {
            Ok(SubsetCounts {
                counts: MarginalCountTable::empty(s, levels)?,
                cell_mass: hyperparameter(spec, levels, s),
            })
        };
        let cliques = graph.cliques().iter().map(build).collect::<Result<_>>()?;
        let separators = graph.separators().iter().map(build).collect::<Result<_>>()?;
        Ok(Self {
            graph,
            cliques,
            separators,
            size: 0,
        })
    }

    pub fn from_rows(
        graph: DecomposableGraph,
        dataset: &CategoricalDataset,
        rows: &[usize],
        spec: &HyperDirichletSpec,
    ) -> Result<Self> {
        let mut stats = Self::new(graph, dataset.levels(), spec)?;
        for &i in rows {
            if i >= dataset.n() {
                return Err(Error::Bounds(format!("row {i} >= n = {}", dataset.n())));
            }
            stats.add_row(dataset.row(i));
        }
        Ok(stats)
    }

    pub fn graph(&self) -> &DecomposableGraph {
        &self.graph
    }

    /// `n_k`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn clique_tables(&self) -> impl Iterator<Item = &MarginalCountTable> {
        self.cliques.iter().map(|t| &t.counts)
    }

    pub fn separator_tables(&self) -> impl Iterator<Item = &MarginalCountTable> {
        self.separators.iter().map(|t| &t.counts)
    }

    pub fn add_row(&mut self, x: &[Code]) {
        for t in self.cliques.iter_mut().chain(self.separators.iter_mut()) {
            t.counts.add_row(x);
        }
        self.size += 1;
    }

    pub fn remove_row(&mut self, x: &[Code]) -> Result<()> {
        if self.size == 0 {
            return Err(Error::State("removing a row from an empty cluster".into()));
        }
        for t in self.cliques.iter_mut().chain(self.separators.iter_mut()) {
            t.counts.remove_row(x)?;
        }
        self.size -= 1;
        Ok(())
    }

    /// `log m(X^{(k)} | 𝒢_k)` from the maintained tables.
    pub fn log_marginal(&self, spec: &HyperDirichletSpec) -> f64 {
        self.cliques
            .iter()
            .map(|t| log_marginal_subset(&t.counts, spec))
            .sum::<f64>()
            - self
                .separators
                .iter()
                .map(|t| log_marginal_subset(&t.counts, spec))
                .sum::<f64>()
    }

    /// Whether the tables equal a fresh recount of `rows`.
    pub fn matches_recount(&self, dataset: &CategoricalDataset, rows: &[usize]) -> Result<bool> {
        if rows.len() != self.size {
            return Ok(false);
        }
        for t in self.cliques.iter().chain(&self.separators) {
            let fresh = marginal_counts(dataset, rows, t.counts.subset())?;
            if fresh.iter().ne(t.counts.iter()) || fresh.total() != t.counts.total() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `log p(x | other rows of the cluster, 𝒢_k)`.
    ///
    /// `includes_x` states whether `x` is currently counted in the tables; if
    /// so its own contribution is subtracted from every count.
    pub fn log_posterior_predictive(
        &self,
        x: &[Code],
        spec: &HyperDirichletSpec,
        includes_x: bool,
    ) -> Result<f64> {
        let ind = if includes_x { 1.0 } else { 0.0 };
        let term = |t: &SubsetCounts| -> Result<f64> {
            let n = t.counts.count_row(x);
            if includes_x && n == 0 {
                return Err(Error::State(format!(
                    "row claimed to be counted but configuration over {:?} has count 0",
                    t.counts.subset()
                )));
            }
            Ok((t.cell_mass + n as f64 - ind).ln())
        };
        let mut out = (self.separators.len() as f64 - self.cliques.len() as f64)
            * (spec.a + self.size as f64 - ind).ln();
        for t in &self.cliques {
            out += term(t)?;
        }
        for t in &self.separators {
            out -= term(t)?;
        }
        Ok(out)
    }
}

/// Free-function form of [`ClusterSuffStats::log_posterior_predictive`].
pub fn log_posterior_predictive(
    x: &[Code],
    stats: &ClusterSuffStats,
    spec: &HyperDirichletSpec,
    includes_x: bool,
) -> Result<f64> {
    stats.log_posterior_predictive(x, spec, includes_x)
}
