//! Synthetic two-cluster data: cluster graphs, Gaussian vectors whose
//! precision matrix follows each graph, and per-variable quantile
//! discretization to binary data.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::chordal::{perturb_graph, random_decomposable_graph, GraphJson, UndirectedGraph};
use crate::data::{CategoricalDataset, Code};
use crate::{ChainRng, Error, Result};

/// Smallest eigenvalue enforced on every precision matrix.
pub const EIGEN_FLOOR: f64 = 0.1;

/// Per-variable quantile orders `α_j` used for discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Uniform on `[low, high]`, drawn from a stream of the master seed that
    /// nothing else consumes, so scenarios sharing a seed share thresholds.
    Random { low: f64, high: f64 },
    Constant { value: f64 },
    Explicit { values: Vec<f64> },
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::Random {
            low: 0.35,
            high: 0.65,
        }
    }
}

impl ThresholdRule {
    pub fn resolve(&self, q: usize, seed: u64) -> Result<Vec<f64>> {
        let values = match self {
            ThresholdRule::Random { low, high } => {
                if !(low <= high) {
                    return Err(Error::Config(format!("threshold range [{low}, {high}] is empty")));
                }
                let mut rng = ChainRng::seed_from_u64(seed);
                rng.set_stream(1);
                (0..q).map(|_| rng.random_range(*low..=*high)).collect()
            }
            ThresholdRule::Constant { value } => vec![*value; q],
            ThresholdRule::Explicit { values } => {
                if values.len() != q {
                    return Err(Error::Config(format!(
                        "{} thresholds given for q = {q}",
                        values.len()
                    )));
                }
                values.clone()
            }
        };
        check_thresholds(&values)?;
        Ok(values)
    }
}

fn check_thresholds(t: &[f64]) -> Result<()> {
    match t.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        Some(a) => Err(Error::Config(format!("threshold {a} outside (0, 1)"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSpec {
    pub q: usize,
    pub n_per_cluster: Vec<usize>,
    /// Edge count of the first cluster graph.
    pub truth_edges: usize,
    /// Random local moves turning the first graph into the second.
    pub m_moves: usize,
    pub thresholds: ThresholdRule,
    pub edge_weight: f64,
    pub seed: u64,
    /// Draw truth graphs without the decomposability restriction.
    pub allow_nonchordal: bool,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            q: 20,
            n_per_cluster: vec![200, 200],
            truth_edges: 20,
            m_moves: 10,
            thresholds: ThresholdRule::default(),
            edge_weight: 0.4,
            seed: 0,
            allow_nonchordal: false,
        }
    }
}

impl ScenarioSpec {
    /// Independence data: both cluster graphs empty.
    pub fn scenario0(q: usize, n_k: usize, seed: u64) -> Self {
        Self {
            q,
            n_per_cluster: vec![n_k, n_k],
            truth_edges: 0,
            m_moves: 0,
            seed,
            ..Self::default()
        }
    }

    /// Sparse first graph and a second graph `m_moves` local moves away.
    pub fn scenario1(q: usize, n_k: usize, seed: u64) -> Self {
        Self {
            q,
            n_per_cluster: vec![n_k, n_k],
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::Config("q must be at least 1".into()));
        }
        if self.n_per_cluster.is_empty() || self.n_per_cluster.contains(&0) {
            return Err(Error::Config("n_per_cluster needs at least one entry, all >= 1".into()));
        }
        if !(self.edge_weight > 0.0 && self.edge_weight < 1.0) {
            return Err(Error::Config(format!(
                "edge_weight must lie in (0, 1), got {}",
                self.edge_weight
            )));
        }
        let pairs = self.q * (self.q - 1) / 2;
        if self.truth_edges > pairs {
            return Err(Error::Config(format!(
                "truth_edges = {} exceeds the {pairs} vertex pairs",
                self.truth_edges
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub graphs: Vec<UndirectedGraph>,
    /// Label `k + 1` for rows generated by cluster `k`.
    pub labels: Vec<usize>,
    pub thresholds: Vec<f64>,
}

#[derive(Serialize)]
struct GraphsFile<'a> {
    graphs: Vec<GraphJson>,
    thresholds: &'a [f64],
}

impl GroundTruth {
    pub fn graphs_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GraphsFile {
            graphs: self.graphs.iter().map(UndirectedGraph::to_json).collect(),
            thresholds: &self.thresholds,
        })?)
    }
}

/// `Ω` with `±w` on edges, unit diagonal, then `δ I` added so that the
/// smallest eigenvalue is at least [`EIGEN_FLOOR`].
pub fn precision_from_graph<R: Rng + ?Sized>(
    graph: &UndirectedGraph,
    edge_weight: f64,
    rng: &mut R,
) -> DMatrix<f64> {
    let q = graph.q();
    let mut omega = DMatrix::identity(q, q);
    for (u, v) in graph.edges() {
        let w = if rng.random::<bool>() { edge_weight } else { -edge_weight };
        omega[(u, v)] = w;
        omega[(v, u)] = w;
    }
    let min_eig = SymmetricEigen::new(omega.clone()).eigenvalues.min();
    let delta = (EIGEN_FLOOR - min_eig).max(0.0);
    for j in 0..q {
        omega[(j, j)] += delta;
    }
    omega
}

/// `n` binary rows: Gaussian draws with covariance `Ω⁻¹`, columns
/// standardized, then `x_j = 1` iff `y_j ≥ Φ⁻¹(α_j)`.
pub fn sample_discretized<R: Rng + ?Sized>(
    n: usize,
    precision: &DMatrix<f64>,
    thresholds: &[f64],
    rng: &mut R,
) -> Result<CategoricalDataset> {
    let q = precision.nrows();
    if precision.ncols() != q || thresholds.len() != q {
        return Err(Error::Validation(format!(
            "precision is {}x{}, {} thresholds",
            precision.nrows(),
            precision.ncols(),
            thresholds.len()
        )));
    }
    check_thresholds(thresholds)?;
    let lt = precision
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numeric("precision matrix is not positive definite".into()))?
        .l()
        .transpose();
    // Ω = L Lᵀ, so y = L⁻ᵀ z has covariance Ω⁻¹.
    let mut y = DMatrix::<f64>::zeros(n, q);
    for i in 0..n {
        let z = DVector::from_fn(q, |_, _| rng.sample::<f64, _>(StandardNormal));
        let yi = lt
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::Numeric("singular Cholesky factor".into()))?;
        y.set_row(i, &yi.transpose());
    }
    if n >= 2 {
        for j in 0..q {
            let mut col = y.column_mut(j);
            let mean = col.mean();
            col.add_scalar_mut(-mean);
            let sd = (col.norm_squared() / (n - 1) as f64).sqrt();
            if sd > 0.0 {
                col /= sd;
            }
        }
    }
    let std_normal = Normal::standard();
    let cuts: Vec<f64> = thresholds.iter().map(|&a| std_normal.inverse_cdf(a)).collect();
    let rows = (0..n)
        .map(|i| (0..q).map(|j| (y[(i, j)] >= cuts[j]) as Code).collect())
        .collect();
    CategoricalDataset::from_codes(&vec![2; q], rows)
}

/// Graph with `edges` edges chosen uniformly among all vertex pairs.
fn random_graph<R: Rng + ?Sized>(q: usize, edges: usize, rng: &mut R) -> Result<UndirectedGraph> {
    let pairs: Vec<(usize, usize)> = (0..q)
        .flat_map(|u| (u + 1..q).map(move |v| (u, v)))
        .collect();
    let mut g = UndirectedGraph::empty(q)?;
    for k in sample(rng, pairs.len(), edges) {
        g.add_edge(pairs[k].0, pairs[k].1);
    }
    Ok(g)
}

fn toggle_random<R: Rng + ?Sized>(graph: &UndirectedGraph, m: usize, rng: &mut R) -> UndirectedGraph {
    let q = graph.q();
    let mut g = graph.clone();
    if q < 2 {
        return g;
    }
    for _ in 0..m {
        let u = rng.random_range(0..q);
        let v = (u + rng.random_range(1..q)) % q;
        g.toggle_edge(u, v);
    }
    g
}

/// Builds the scenario's cluster graphs and data, deterministically in `spec.seed`.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<(CategoricalDataset, GroundTruth)> {
    spec.validate()?;
    let thresholds = spec.thresholds.resolve(spec.q, spec.seed)?;
    let mut rng = ChainRng::seed_from_u64(spec.seed);
    let first = if spec.allow_nonchordal {
        random_graph(spec.q, spec.truth_edges, &mut rng)?
    } else {
        random_decomposable_graph(spec.q, spec.truth_edges, &mut rng)?
    };
    let mut graphs = vec![first];
    for _ in 1..spec.n_per_cluster.len() {
        let g = if spec.allow_nonchordal {
            toggle_random(&graphs[0], spec.m_moves, &mut rng)
        } else {
            perturb_graph(&graphs[0], spec.m_moves, &mut rng)?
        };
        graphs.push(g);
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (k, (graph, &n_k)) in graphs.iter().zip(&spec.n_per_cluster).enumerate() {
        let omega = precision_from_graph(graph, spec.edge_weight, &mut rng);
        let part = sample_discretized(n_k, &omega, &thresholds, &mut rng)?;
        rows.extend(part.rows().map(<[Code]>::to_vec));
        labels.extend(std::iter::repeat_n(k + 1, n_k));
    }
    let dataset = CategoricalDataset::from_codes(&vec![2; spec.q], rows)?;
    Ok((
        dataset,
        GroundTruth {
            graphs,
            labels,
            thresholds,
        },
    ))
}
