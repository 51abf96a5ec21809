//! Posterior summaries of a sampler trace: co-clustering similarity, the
//! variation of information between partitions, the minVI point estimate,
//! per-subject edge inclusion probabilities and thresholded graphs.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::chordal::UndirectedGraph;
use crate::sampler::Trace;
use crate::{Error, Result};

/// Cluster labels in canonical form: `1..=K` in order of first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = FxHashMap::default();
        let labels = labels
            .iter()
            .map(|l| {
                let next = map.len() + 1;
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Size of cluster `l` at index `l - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &l in &self.labels {
            sizes[l - 1] += 1;
        }
        sizes
    }

    /// Members of each cluster, by label.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.k()];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l - 1].push(i);
        }
        blocks
    }

    /// Row order for a heatmap: clusters by decreasing size (label order on
    /// ties), members by index.
    pub fn heatmap_order(&self) -> Vec<usize> {
        let mut blocks = self.blocks();
        blocks.sort_by_key(|b| std::cmp::Reverse(b.len()));
        blocks.concat()
    }
}

fn plogp_ratio(joint: f64, marginal: f64) -> f64 {
    joint * (joint / marginal).ln()
}

/// `VI = H(c1) + H(c2) - 2 I(c1, c2)` with natural logarithms.
pub fn vi_distance(c1: &Partition, c2: &Partition) -> Result<f64> {
    if c1.n() != c2.n() {
        return Err(Error::Validation(format!(
            "partitions over {} and {} items",
            c1.n(),
            c2.n()
        )));
    }
    let n = c1.n();
    if n == 0 {
        return Ok(0.0);
    }
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    for (&a, &b) in c1.labels.iter().zip(&c2.labels) {
        *joint.entry((a, b)).or_default() += 1;
    }
    let (s1, s2) = (c1.sizes(), c2.sizes());
    let nf = n as f64;
    let vi: f64 = joint
        .iter()
        .map(|(&(a, b), &c)| {
            let p = c as f64 / nf;
            -plogp_ratio(p, s1[a - 1] as f64 / nf) - plogp_ratio(p, s2[b - 1] as f64 / nf)
        })
        .sum();
    Ok(vi.max(0.0))
}

fn matrix_csv<W: Write>(out: W, dim: usize, values: &[f64], header: Option<&[String]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for row in values.chunks(dim.max(1)) {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

/// Posterior co-clustering proportions.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_partitions<'a, I>(n: usize, draws: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let mut counts = vec![0u32; n * n];
        let mut s = 0u32;
        let mut members: FxHashMap<usize, Vec<usize>> = FxHashMap::default();
        for labels in draws {
            if labels.len() != n {
                return Err(Error::Validation(format!(
                    "draw with {} labels, expected {n}",
                    labels.len()
                )));
            }
            members.clear();
            for (i, &l) in labels.iter().enumerate() {
                members.entry(l).or_default().push(i);
            }
            for block in members.values() {
                for &i in block {
                    let row = &mut counts[i * n..(i + 1) * n];
                    for &j in block {
                        row[j] += 1;
                    }
                }
            }
            s += 1;
        }
        if s == 0 {
            return Err(Error::Validation("no draws to summarize".into()));
        }
        let values = counts.into_iter().map(|c| c as f64 / s as f64).collect();
        Ok(Self { n, values })
    }

    pub fn from_trace(trace: &Trace) -> Result<Self> {
        Self::from_partitions(trace.n(), trace.draws.iter().map(|d| d.assignments.as_slice()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        matrix_csv(out, self.n, &self.values, None)
    }

    /// Binary PGM with rows and columns in `order`; black is similarity 1.
    pub fn write_pgm<W: Write>(&self, mut out: W, order: &[usize]) -> Result<()> {
        if order.len() != self.n || order.iter().any(|&i| i >= self.n) {
            return Err(Error::Validation("heatmap order is not a permutation of the rows".into()));
        }
        write!(out, "P5\n{} {}\n255\n", self.n, self.n)?;
        let mut pixels = Vec::with_capacity(self.n * self.n);
        for &i in order {
            for &j in order {
                pixels.push((255.0 * (1.0 - self.get(i, j))).round() as u8);
            }
        }
        out.write_all(&pixels)?;
        Ok(())
    }
}

/// Jensen lower bound to the posterior expected VI of `c`:
/// `(1/n) Σ_i [log |c(i)| + log Σ_j S_ij - 2 log Σ_{j ∈ c(i)} S_ij]`.
pub fn vi_lower_bound(c: &Partition, sim: &SimilarityMatrix) -> Result<f64> {
    let n = sim.n();
    if c.n() != n {
        return Err(Error::Validation(format!(
            "partition over {} items, similarity matrix over {n}",
            c.n()
        )));
    }
    let mut total = 0.0;
    for block in c.blocks() {
        let size_term = (block.len() as f64).ln();
        for &i in &block {
            let row = sim.row(i);
            let all: f64 = row.iter().sum();
            let within: f64 = block.iter().map(|&j| row[j]).sum();
            total += size_term + all.ln() - 2.0 * within.ln();
        }
    }
    Ok(total / n as f64)
}

/// Among the distinct partitions in `candidates`, the one minimizing
/// [`vi_lower_bound`]; ties go to fewer clusters, then to the earliest.
pub fn minvi_from_candidates<'a, I>(candidates: I, sim: &SimilarityMatrix) -> Result<Partition>
where
    I: IntoIterator<Item = &'a [usize]>,
{
    let mut seen = std::collections::HashSet::new();
    let mut best: Option<(f64, Partition)> = None;
    for labels in candidates {
        let c = Partition::from_labels(labels);
        if !seen.insert(c.clone()) {
            continue;
        }
        let lb = vi_lower_bound(&c, sim)?;
        let better = match &best {
            None => true,
            Some((b, bc)) => {
                let tol = 1e-12 * b.abs().max(1.0);
                lb < b - tol || (lb <= b + tol && c.k() < bc.k())
            }
        };
        if better {
            best = Some((lb, c));
        }
    }
    best.map(|(_, c)| c)
        .ok_or_else(|| Error::Validation("no draws to summarize".into()))
}

pub fn minvi_point_estimate(trace: &Trace, sim: &SimilarityMatrix) -> Result<Partition> {
    minvi_from_candidates(trace.draws.iter().map(|d| d.assignments.as_slice()), sim)
}

/// Per-subject posterior edge inclusion probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PpiMatrix {
    q: usize,
    values: Vec<f64>,
}

impl PpiMatrix {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[u * self.q + v]
    }

    pub fn from_values(q: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != q * q {
            return Err(Error::Validation(format!("{} entries for q = {q}", values.len())));
        }
        for u in 0..q {
            if values[u * q + u] != 0.0 {
                return Err(Error::Validation("nonzero diagonal".into()));
            }
            for v in 0..q {
                let x = values[u * q + v];
                if !(0.0..=1.0).contains(&x) || x != values[v * q + u] {
                    return Err(Error::Validation(format!("invalid entry ({u}, {v}) = {x}")));
                }
            }
        }
        Ok(Self { q, values })
    }

    pub fn write_csv<W: Write>(&self, out: W, header: Option<&[String]>) -> Result<()> {
        matrix_csv(out, self.q, &self.values, header)
    }
}

/// Fraction of draws in which the graph of `subject`'s cluster contains each edge.
pub fn ppi(trace: &Trace, subject: usize) -> Result<PpiMatrix> {
    if subject >= trace.n() {
        return Err(Error::Bounds(format!(
            "subject {subject} out of range for n = {}",
            trace.n()
        )));
    }
    if trace.is_empty() {
        return Err(Error::Validation("no draws to summarize".into()));
    }
    let q = trace.q();
    let mut counts = vec![0u32; q * q];
    for d in &trace.draws {
        let label = d.assignments[subject];
        let edges = d
            .graphs
            .get(label - 1)
            .ok_or_else(|| Error::Validation(format!("draw at iter {} lacks graph {label}", d.iter)))?;
        for &[u, v] in edges {
            counts[u * q + v] += 1;
            counts[v * q + u] += 1;
        }
    }
    let s = trace.draws.len() as f64;
    Ok(PpiMatrix {
        q,
        values: counts.into_iter().map(|c| c as f64 / s).collect(),
    })
}

/// Edges whose inclusion probability strictly exceeds `z`.
pub fn threshold_graph(ppi: &PpiMatrix, z: f64) -> Result<UndirectedGraph> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::Config(format!("threshold z must lie in (0, 1), got {z}")));
    }
    let mut g = UndirectedGraph::empty(ppi.q)?;
    for u in 0..ppi.q {
        for v in u + 1..ppi.q {
            if ppi.get(u, v) > z {
                g.add_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// Writes `content` to `path` through a buffered file handle.
pub fn write_file<F>(path: impl AsRef<Path>, content: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>,
{
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    content(&mut w)?;
    w.flush()?;
    Ok(())
}
