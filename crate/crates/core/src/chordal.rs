//! Decomposable (chordal) undirected graphs.
//!
//! Vertices are `0..q` with `q <= 64`; adjacency rows are bit masks. Chordality
//! is decided with Maximum Cardinality Search (ties to the smallest vertex),
//! whose visit order also yields the cliques in a running-intersection order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_VERTICES: usize = 64;

#[inline]
fn bit(v: usize) -> u64 {
    1u64 << v
}

/// Iterates the set bits of a mask in increasing order.
fn members(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(v)
        }
    })
}

fn to_vec(mask: u64) -> Vec<usize> {
    members(mask).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct UndirectedGraph {
    q: usize,
    adj: Vec<u64>,
}

impl UndirectedGraph {
    /// The graph on `q` vertices with no edges.
    pub fn empty(q: usize) -> Result<Self> {
        if q > MAX_VERTICES {
            return Err(Error::Domain(format!(
                "graphs support at most {MAX_VERTICES} vertices, got {q}"
            )));
        }
        Ok(Self { q, adj: vec![0; q] })
    }

    pub fn complete(q: usize) -> Result<Self> {
        let mut g = Self::empty(q)?;
        for u in 0..q {
            g.adj[u] = ((1u128 << q) - 1) as u64 & !bit(u);
        }
        Ok(g)
    }

    pub fn from_edges(q: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(q)?;
        for &(u, v) in edges {
            if u >= q || v >= q {
                return Err(Error::Bounds(format!("edge ({u},{v}) with q = {q}")));
            }
            if u == v {
                return Err(Error::Domain(format!("self-loop at {u}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] & bit(v) != 0
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v);
        self.adj[u] |= bit(v);
        self.adj[v] |= bit(u);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.adj[u] &= !bit(v);
        self.adj[v] &= !bit(u);
    }

    pub fn toggle_edge(&mut self, u: usize, v: usize) {
        if self.has_edge(u, v) {
            self.remove_edge(u, v)
        } else {
            self.add_edge(u, v)
        }
    }

    /// Neighbours of `v` as a bit mask.
    #[inline]
    pub fn neighbor_mask(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        to_vec(self.adj[v])
    }

    /// `|𝒢|`, the number of edges.
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.q)
            .flat_map(|u| members(self.adj[u] & !(bit(u) << 1).wrapping_sub(1)).map(move |v| (u, v)))
            .collect()
    }

    /// Number of vertex pairs on which the two graphs differ.
    pub fn hamming(&self, other: &Self) -> usize {
        assert_eq!(self.q, other.q, "graphs on different vertex sets");
        self.adj
            .iter()
            .zip(&other.adj)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    /// Whether the vertices of `mask` are pairwise adjacent.
    pub(crate) fn is_complete_mask(&self, mask: u64) -> bool {
        members(mask).all(|w| (mask & !bit(w)) & !self.adj[w] == 0)
    }

    /// Vertices reachable from `start` without entering `blocked`.
    fn reach_avoiding(&self, start: usize, blocked: u64) -> u64 {
        let allowed = !blocked;
        let mut seen = bit(start);
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0;
            for w in members(frontier) {
                next |= self.adj[w];
            }
            frontier = next & allowed & !seen;
            seen |= frontier;
        }
        seen
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            q: self.q,
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }
}

/// Serialized form: vertex count plus 0-based `[u, v]` edge list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub q: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<UndirectedGraph> for GraphJson {
    fn from(g: UndirectedGraph) -> Self {
        g.to_json()
    }
}

impl TryFrom<GraphJson> for UndirectedGraph {
    type Error = Error;

    fn try_from(g: GraphJson) -> Result<Self> {
        let edges: Vec<(usize, usize)> = g.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::from_edges(g.q, &edges)
    }
}

struct Mcs {
    order: Vec<usize>,
    /// Number of already visited neighbours at the time each vertex was visited.
    labels: Vec<usize>,
}

fn maximum_cardinality_search(g: &UndirectedGraph) -> Mcs {
    let q = g.q;
    let mut weight = vec![0usize; q];
    let mut visited = 0u64;
    let mut order = Vec::with_capacity(q);
    let mut labels = Vec::with_capacity(q);
    for _ in 0..q {
        let v = (0..q)
            .filter(|&v| visited & bit(v) == 0)
            .fold(None, |best: Option<usize>, v| match best {
                Some(b) if weight[b] >= weight[v] => Some(b),
                _ => Some(v),
            })
            .expect("unvisited vertex remains");
        order.push(v);
        labels.push(weight[v]);
        visited |= bit(v);
        for w in members(g.adj[v] & !visited) {
            weight[w] += 1;
        }
    }
    Mcs { order, labels }
}

/// True iff every cycle of length at least four has a chord.
pub fn is_decomposable(graph: &UndirectedGraph) -> bool {
    let mcs = maximum_cardinality_search(graph);
    // The reverse visit order is a perfect elimination ordering iff the
    // earlier-visited neighbours of every vertex are pairwise adjacent.
    let mut visited = 0u64;
    for &v in &mcs.order {
        if !graph.is_complete_mask(graph.adj[v] & visited) {
            return false;
        }
        visited |= bit(v);
    }
    true
}

/// Cliques `C_1..C_K` in running-intersection order and separators
/// `S_k = C_k ∩ (C_1 ∪ … ∪ C_{k-1})` for `k = 2..K`, kept with multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueDecomposition {
    cliques: Vec<Vec<usize>>,
    separators: Vec<Vec<usize>>,
}

impl CliqueDecomposition {
    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn separators(&self) -> &[Vec<usize>] {
        &self.separators
    }
}

pub fn clique_decomposition(graph: &UndirectedGraph) -> Result<CliqueDecomposition> {
    if !is_decomposable(graph) {
        return Err(Error::Domain("graph is not decomposable".into()));
    }
    Ok(decompose_chordal(graph))
}

fn decompose_chordal(graph: &UndirectedGraph) -> CliqueDecomposition {
    let mcs = maximum_cardinality_search(graph);
    let mut cliques: Vec<u64> = Vec::new();
    let mut separators: Vec<u64> = Vec::new();
    let mut visited = 0u64;
    for (i, (&v, &label)) in mcs.order.iter().zip(&mcs.labels).enumerate() {
        let parents = graph.adj[v] & visited;
        // A non-increasing MCS label closes the previous clique.
        if i == 0 || label <= mcs.labels[i - 1] {
            if i > 0 {
                separators.push(parents);
            }
            cliques.push(parents | bit(v));
        } else {
            *cliques.last_mut().expect("clique open") |= bit(v);
        }
        visited |= bit(v);
    }
    CliqueDecomposition {
        cliques: cliques.into_iter().map(to_vec).collect(),
        separators: separators.into_iter().map(to_vec).collect(),
    }
}

/// A graph checked to be decomposable, together with its decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecomposableGraph {
    graph: UndirectedGraph,
    decomposition: CliqueDecomposition,
}

impl DecomposableGraph {
    pub fn new(graph: UndirectedGraph) -> Result<Self> {
        let decomposition = clique_decomposition(&graph)?;
        Ok(Self {
            graph,
            decomposition,
        })
    }

    pub fn empty(q: usize) -> Result<Self> {
        Self::new(UndirectedGraph::empty(q)?)
    }

    pub fn graph(&self) -> &UndirectedGraph {
        &self.graph
    }

    pub fn into_graph(self) -> UndirectedGraph {
        self.graph
    }

    pub fn q(&self) -> usize {
        self.graph.q
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.decomposition.cliques
    }

    pub fn separators(&self) -> &[Vec<usize>] {
        &self.decomposition.separators
    }

    pub fn decomposition(&self) -> &CliqueDecomposition {
        &self.decomposition
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    Deletion,
    Insertion,
}

/// Single-edge toggle on the pair `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GraphMove {
    pub kind: MoveKind,
    pub u: usize,
    pub v: usize,
}

impl GraphMove {
    pub fn insertion(u: usize, v: usize) -> Self {
        let (u, v) = (u.min(v), u.max(v));
        Self {
            kind: MoveKind::Insertion,
            u,
            v,
        }
    }

    pub fn deletion(u: usize, v: usize) -> Self {
        let (u, v) = (u.min(v), u.max(v));
        Self {
            kind: MoveKind::Deletion,
            u,
            v,
        }
    }

    pub fn inverse(self) -> Self {
        let kind = match self.kind {
            MoveKind::Deletion => MoveKind::Insertion,
            MoveKind::Insertion => MoveKind::Deletion,
        };
        Self { kind, ..self }
    }
}

/// Whether applying `mv` to the decomposable `graph` yields a decomposable graph.
///
/// With `W` the common neighbours of `u` and `v`: deleting `u-v` is legal iff
/// `W` is complete, and inserting it is legal iff `W` separates `u` from `v`.
pub fn is_valid_move(graph: &UndirectedGraph, mv: GraphMove) -> bool {
    let GraphMove { kind, u, v } = mv;
    if u == v || u >= graph.q || v >= graph.q {
        return false;
    }
    let common = graph.adj[u] & graph.adj[v];
    match kind {
        MoveKind::Deletion => graph.has_edge(u, v) && graph.is_complete_mask(common),
        MoveKind::Insertion => {
            !graph.has_edge(u, v) && graph.reach_avoiding(u, common) & bit(v) == 0
        }
    }
}

fn pair_move(graph: &UndirectedGraph, u: usize, v: usize) -> GraphMove {
    if graph.has_edge(u, v) {
        GraphMove::deletion(u, v)
    } else {
        GraphMove::insertion(u, v)
    }
}

pub(crate) fn valid_moves(graph: &UndirectedGraph) -> Vec<GraphMove> {
    let q = graph.q;
    let mut out = Vec::new();
    for u in 0..q {
        for v in u + 1..q {
            let mv = pair_move(graph, u, v);
            if is_valid_move(graph, mv) {
                out.push(mv);
            }
        }
    }
    out
}

/// `|𝒪_𝒢|` for a graph already known to be decomposable.
pub fn count_valid_moves(graph: &UndirectedGraph) -> usize {
    let q = graph.q;
    (0..q)
        .flat_map(|u| (u + 1..q).map(move |v| (u, v)))
        .filter(|&(u, v)| is_valid_move(graph, pair_move(graph, u, v)))
        .count()
}

/// All single-edge moves that keep the graph decomposable, ordered by endpoints.
pub fn enumerate_valid_moves(graph: &UndirectedGraph) -> Result<Vec<GraphMove>> {
    if !is_decomposable(graph) {
        return Err(Error::Domain("graph is not decomposable".into()));
    }
    Ok(valid_moves(graph))
}

pub fn apply_move(graph: &UndirectedGraph, mv: GraphMove) -> Result<UndirectedGraph> {
    if !is_decomposable(graph) {
        return Err(Error::Domain("graph is not decomposable".into()));
    }
    if !is_valid_move(graph, mv) {
        return Err(Error::Domain(format!(
            "{:?} of {}-{} is not a valid move",
            mv.kind, mv.u, mv.v
        )));
    }
    let mut out = graph.clone();
    out.toggle_edge(mv.u, mv.v);
    Ok(out)
}

/// Grows a decomposable graph from the empty graph by uniformly chosen valid
/// insertions until it has `target_edges` edges.
pub fn random_decomposable_graph<R: Rng + ?Sized>(
    q: usize,
    target_edges: usize,
    rng: &mut R,
) -> Result<UndirectedGraph> {
    let max_edges = q * q.saturating_sub(1) / 2;
    if target_edges > max_edges {
        return Err(Error::Domain(format!(
            "{target_edges} edges requested on {q} vertices (max {max_edges})"
        )));
    }
    let mut g = UndirectedGraph::empty(q)?;
    while g.edge_count() < target_edges {
        let inserts: Vec<GraphMove> = valid_moves(&g)
            .into_iter()
            .filter(|m| m.kind == MoveKind::Insertion)
            .collect();
        // Some insertion is always legal below the complete graph.
        assert!(!inserts.is_empty(), "no valid insertion on a non-complete chordal graph");
        let mv = inserts[rng.random_range(0..inserts.len())];
        g.add_edge(mv.u, mv.v);
    }
    Ok(g)
}

/// Applies `moves` uniformly chosen valid moves in sequence.
pub fn perturb_graph<R: Rng + ?Sized>(
    graph: &UndirectedGraph,
    moves: usize,
    rng: &mut R,
) -> Result<UndirectedGraph> {
    if !is_decomposable(graph) {
        return Err(Error::Domain("graph is not decomposable".into()));
    }
    let mut g = graph.clone();
    for _ in 0..moves {
        let options = valid_moves(&g);
        if options.is_empty() {
            break;
        }
        let mv = options[rng.random_range(0..options.len())];
        g.toggle_edge(mv.u, mv.v);
    }
    Ok(g)
}
