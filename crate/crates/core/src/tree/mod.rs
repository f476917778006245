//! Distributed labelling of a rooted spanning tree.
//!
//! The pipeline for one tree `T` of the communication graph `G`:
//!
//! 1. [`build_bfs`]: a BFS tree of `G` rooted at vertex 0, used for every
//!    upcast and downcast (built once per graph).
//! 2. [`decompose`]: bottom-up fragment growth splits `T` into connected
//!    fragments of height below `⌈√n⌉`.
//! 3. [`prepare_tree`]: fragment roots report the contracted tree to vertex 0,
//!    which sends back subtree sizes and preorder offsets; fragments finish
//!    `pre` and `size` internally and neighbors exchange `pre`.
//! 4. [`BridgeFinder`]: per sampled subgraph, aggregates `low`/`high` through
//!    the contracted tree and decides the bridge predicate for every tree edge.

mod bfs;
mod cast;
mod decompose;
mod lowhigh;
mod preorder;

use thiserror::Error;

use crate::graph::{VertexId, WeightedMultigraph};
use crate::sim::{SimError, Topology};

pub use bfs::{build_bfs, BfsTree};
pub use cast::{aggregate, downcast, upcast, AggValue, CastRecord, Routes};
pub use decompose::{decompose, FragmentDecomposition};
pub use lowhigh::{compute_low_high, find_bridges, BridgeFinder, LowHigh, MAX_LANES};
pub use preorder::{compute_preorder, prepare_tree, PreparedTree};

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("not a spanning tree: {0}")]
    NotATree(String),
    #[error("tree edge ({0},{1}) is not an edge of the graph")]
    NotInGraph(VertexId, VertexId),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A spanning tree with a root and parent pointers. Children are kept in
/// ascending id order, which fixes the preorder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedSpanningTree {
    root: VertexId,
    parent: Vec<VertexId>,
    children: Vec<Vec<VertexId>>,
}

impl RootedSpanningTree {
    /// `parent[root] == root`; every other vertex must reach the root.
    pub fn from_parents(parent: Vec<VertexId>) -> Result<Self, TreeError> {
        let n = parent.len();
        if n == 0 {
            return Err(TreeError::NotATree("no vertices".into()));
        }
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v] as usize == v).collect();
        if roots.len() != 1 {
            return Err(TreeError::NotATree(format!("{} roots", roots.len())));
        }
        let root = roots[0] as VertexId;
        let mut children = vec![Vec::new(); n];
        for (v, &p) in parent.iter().enumerate() {
            if p as usize >= n {
                return Err(TreeError::NotATree(format!("parent {p} of {v} out of range")));
            }
            if v as VertexId != root {
                children[p as usize].push(v as VertexId);
            }
        }
        let tree = RootedSpanningTree { root, parent, children };
        let reached = tree.preorder_walk().len();
        if reached != n {
            return Err(TreeError::NotATree(format!("only {reached} of {n} vertices reach the root")));
        }
        Ok(tree)
    }

    /// Orients an undirected edge set from `root`.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)], root: VertexId) -> Result<Self, TreeError> {
        if edges.len() + 1 != n {
            return Err(TreeError::NotATree(format!("{} edges for {n} vertices", edges.len())));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n || u == v {
                return Err(TreeError::NotATree(format!("bad edge ({u},{v})")));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let mut parent = vec![VertexId::MAX; n];
        parent[root as usize] = root;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for &y in &adj[x as usize] {
                if parent[y as usize] == VertexId::MAX {
                    parent[y as usize] = x;
                    stack.push(y);
                }
            }
        }
        if parent.contains(&VertexId::MAX) {
            return Err(TreeError::NotATree("edges do not connect every vertex".into()));
        }
        Self::from_parents(parent)
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        (v != self.root).then(|| self.parent[v as usize])
    }

    pub fn parents(&self) -> &[VertexId] {
        &self.parent
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v as usize]
    }

    /// `(parent, child)` for every non-root vertex, by child id.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.n() as VertexId).filter_map(move |v| self.parent(v).map(|p| (p, v)))
    }

    pub fn contains_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.parent(v) == Some(u) || self.parent(u) == Some(v)
    }

    /// Vertices in preorder with ascending child order.
    pub fn preorder_walk(&self) -> Vec<VertexId> {
        let mut order = Vec::with_capacity(self.n());
        let mut stack = vec![self.root];
        let mut seen = vec![false; self.n()];
        while let Some(x) = stack.pop() {
            if std::mem::replace(&mut seen[x as usize], true) {
                continue;
            }
            order.push(x);
            stack.extend(self.children[x as usize].iter().rev());
        }
        order
    }

    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.n()];
        let mut max = 0;
        for v in self.preorder_walk() {
            if let Some(p) = self.parent(v) {
                depth[v as usize] = depth[p as usize] + 1;
                max = max.max(depth[v as usize]);
            }
        }
        max
    }

    pub fn check_spans(&self, g: &WeightedMultigraph) -> Result<(), TreeError> {
        if self.n() != g.n() {
            return Err(TreeError::NotATree(format!("tree has {} vertices, graph {}", self.n(), g.n())));
        }
        for (p, c) in self.edges() {
            if g.edge_index(p, c).is_none() {
                return Err(TreeError::NotInGraph(p, c));
            }
        }
        Ok(())
    }
}

/// Per-vertex labels of a rooted tree against one sampled subgraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeLabels {
    pub pre: Vec<u32>,
    pub size: Vec<u32>,
    pub low: Vec<u32>,
    pub high: Vec<u32>,
}

/// Sentinel slot for "no such channel".
pub(crate) const NO_SLOT: u32 = u32::MAX;

/// What each vertex knows locally about `T`: the slot of its tree parent
/// and the slots of its tree children, ascending.
#[derive(Clone, Debug)]
pub(crate) struct TreeSlots {
    parent: Vec<u32>,
    offsets: Vec<u32>,
    children: Vec<u32>,
}

impl TreeSlots {
    pub(crate) fn new(topo: &Topology, tree: &RootedSpanningTree) -> Result<Self, TreeError> {
        if tree.n() != topo.n() {
            return Err(TreeError::NotATree(format!("tree has {} vertices, graph {}", tree.n(), topo.n())));
        }
        let slot = |u: VertexId, v: VertexId| topo.slot_of(u, v).ok_or(TreeError::NotInGraph(u, v));
        let mut parent = Vec::with_capacity(tree.n());
        let mut offsets = vec![0u32];
        let mut children = Vec::with_capacity(tree.n());
        for v in 0..tree.n() as VertexId {
            parent.push(match tree.parent(v) {
                Some(p) => slot(v, p)?,
                None => NO_SLOT,
            });
            for &c in tree.children(v) {
                children.push(slot(v, c)?);
            }
            offsets.push(children.len() as u32);
        }
        Ok(TreeSlots { parent, offsets, children })
    }

    pub(crate) fn parent(&self, v: VertexId) -> Option<u32> {
        let s = self.parent[v as usize];
        (s != NO_SLOT).then_some(s)
    }

    pub(crate) fn children(&self, v: VertexId) -> &[u32] {
        &self.children[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }
}
