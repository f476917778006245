//! Weighted multigraphs, vertex bipartitions, skeleton sampling and the
//! plain-text edge-list format.
//!
//! An edge of weight `w` stands for `w` parallel unit edges. Parallel edges
//! are never materialized: an [`Edge`] carries its multiplicity and samplers
//! draw `Binomial(w, p)` per record.

mod generate;
mod io;
mod sample;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate, GeneratedGraph, GraphModel, InternalModel, PlantedCut};
pub use io::{load_graph, parse_graph, save_graph, write_graph, GraphFile};
pub use sample::{binomial, sample_multiplicities, sample_subgraph, SampledSubgraph};

pub type VertexId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: VertexId, n: usize },
    #[error("edge ({u},{v}) has weight {w} outside [1, {max}]")]
    WeightOutOfRange { u: VertexId, v: VertexId, w: u64, max: u64 },
    #[error("edge ({u},{v}) listed twice")]
    DuplicateEdge { u: VertexId, v: VertexId },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no vertices")]
    Empty,
    #[error("invalid vertex side: {0}")]
    InvalidSide(String),
    #[error("sampling probability {0} outside (0, 1]")]
    InvalidProbability(f64),
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One weighted edge, stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub w: u64,
}

impl Edge {
    pub fn new(u: VertexId, v: VertexId, w: u64) -> Self {
        if u <= v {
            Edge { u, v, w }
        } else {
            Edge { u: v, v: u, w }
        }
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Connected, integer-weighted undirected graph on vertices `0..n`.
///
/// Edges are kept sorted by `(u, v)` with `u < v` and at most one record per
/// vertex pair; the weight of the record is the pair's multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedMultigraph {
    n: usize,
    edges: Vec<Edge>,
    max_weight: u64,
    labels: Option<Vec<String>>,
}

impl WeightedMultigraph {
    /// Validates and builds a graph with the default weight bound `W = n²`.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        Self::with_max_weight(n, edges, default_max_weight(n))
    }

    pub fn with_max_weight(n: usize, mut edges: Vec<Edge>, max_weight: u64) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for e in edges.iter_mut() {
            *e = Edge::new(e.u, e.v, e.w);
            if e.u == e.v {
                return Err(GraphError::SelfLoop(e.u));
            }
            if e.v as usize >= n {
                return Err(GraphError::VertexOutOfRange { v: e.v, n });
            }
            if e.w == 0 || e.w > max_weight {
                return Err(GraphError::WeightOutOfRange { u: e.u, v: e.v, w: e.w, max: max_weight });
            }
        }
        edges.sort_unstable();
        for pair in edges.windows(2) {
            if pair[0].u == pair[1].u && pair[0].v == pair[1].v {
                return Err(GraphError::DuplicateEdge { u: pair[0].u, v: pair[0].v });
            }
        }
        let g = WeightedMultigraph { n, edges, max_weight, labels: None };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub(crate) fn set_labels(&mut self, labels: Vec<String>) {
        debug_assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Number of edge records (distinct adjacent pairs).
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Total multiplicity, the edge count of the unit multigraph.
    pub fn m_multi(&self) -> u64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// The weight bound `W`.
    pub fn max_weight(&self) -> u64 {
        self.max_weight
    }

    /// External vertex labels, when the graph was loaded from a labeled file.
    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn edge_index(&self, u: VertexId, v: VertexId) -> Option<usize> {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search_by(|e| (e.u, e.v).cmp(&(a, b))).ok()
    }

    /// Adjacency lists of `(neighbor, edge index)` sorted by neighbor id.
    pub fn adjacency(&self) -> Vec<Vec<(VertexId, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u as usize].push((e.v, i));
            adj[e.v as usize].push((e.u, i));
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        adj
    }

    /// Weighted degree of `v`.
    pub fn degree(&self, v: VertexId) -> u64 {
        self.edges.iter().filter(|e| e.u == v || e.v == v).map(|e| e.w).sum()
    }

    fn is_connected(&self) -> bool {
        bfs_distances(self.n, &self.adjacency(), 0).iter().all(|d| d.is_some())
    }

    /// Hop eccentricity of `source` (ignoring weights).
    pub fn eccentricity(&self, source: VertexId) -> usize {
        bfs_distances(self.n, &self.adjacency(), source)
            .into_iter()
            .map(|d| d.expect("graph is connected"))
            .max()
            .unwrap_or(0)
    }

    /// Unweighted hop diameter.
    pub fn diameter(&self) -> usize {
        let adj = self.adjacency();
        (0..self.n as VertexId)
            .map(|s| bfs_distances(self.n, &adj, s).into_iter().map(|d| d.unwrap_or(0)).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

pub fn default_max_weight(n: usize) -> u64 {
    let n = n as u64;
    (n * n).max(1)
}

pub(crate) fn bfs_distances(n: usize, adj: &[Vec<(VertexId, usize)>], source: VertexId) -> Vec<Option<usize>> {
    let mut dist = vec![None; n];
    let mut queue = VecDeque::new();
    dist[source as usize] = Some(0);
    queue.push_back(source);
    while let Some(x) = queue.pop_front() {
        let d = dist[x as usize].unwrap();
        for &(y, _) in &adj[x as usize] {
            if dist[y as usize].is_none() {
                dist[y as usize] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

/// One side `S` of a cut `(S, V \ S)` with `∅ ⊂ S ⊂ V`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexSide {
    member: Vec<bool>,
    len: usize,
}

impl VertexSide {
    pub fn new(n: usize, members: impl IntoIterator<Item = VertexId>) -> Result<Self, GraphError> {
        let mut member = vec![false; n];
        for v in members {
            let slot = member.get_mut(v as usize).ok_or(GraphError::VertexOutOfRange { v, n })?;
            *slot = true;
        }
        Self::from_mask(member)
    }

    pub fn from_mask(member: Vec<bool>) -> Result<Self, GraphError> {
        let len = member.iter().filter(|&&b| b).count();
        if len == 0 {
            return Err(GraphError::InvalidSide("side is empty".into()));
        }
        if len == member.len() {
            return Err(GraphError::InvalidSide("side contains every vertex".into()));
        }
        Ok(VertexSide { member, len })
    }

    pub fn n(&self) -> usize {
        self.member.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.member.get(v as usize).copied().unwrap_or(false)
    }

    pub fn members(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.member.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as VertexId)
    }

    pub fn mask(&self) -> &[bool] {
        &self.member
    }

    pub fn complement(&self) -> VertexSide {
        VertexSide { member: self.member.iter().map(|b| !b).collect(), len: self.n() - self.len }
    }

    /// The side containing vertex 0, so that a cut and its complement
    /// normalize to the same value.
    pub fn normalized(&self) -> VertexSide {
        if self.contains(0) {
            self.clone()
        } else {
            self.complement()
        }
    }
}

/// Total weight of the edges with exactly one endpoint in `side`.
pub fn cut_weight(g: &WeightedMultigraph, side: &VertexSide) -> Result<u64, GraphError> {
    if side.n() != g.n() {
        return Err(GraphError::InvalidSide(format!("side is over {} vertices, graph has {}", side.n(), g.n())));
    }
    Ok(g.edges().iter().filter(|e| side.contains(e.u) != side.contains(e.v)).map(|e| e.w).sum())
}
