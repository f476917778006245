use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{cut_weight, Edge, GraphError, VertexId, VertexSide, WeightedMultigraph};
use crate::rng::Seed;

/// How the two halves of a planted instance are wired internally.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InternalModel {
    Clique,
    /// A random spanning tree plus every other pair independently with `p`.
    Random {
        p: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GraphModel {
    /// Two dense halves joined by `crossing` unit edges.
    PlantedCut {
        n_a: usize,
        n_b: usize,
        internal: InternalModel,
        crossing: u64,
    },
    RandomConnected {
        n: usize,
        extra_edges: usize,
        max_edge_weight: u64,
    },
    /// `len` cliques of size `k` chained by single edges.
    CliquePath {
        k: usize,
        len: usize,
    },
}

/// Cut recorded by the planted-cut generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantedCut {
    pub weight: u64,
    pub side: VertexSide,
}

#[derive(Clone, Debug)]
pub struct GeneratedGraph {
    pub graph: WeightedMultigraph,
    pub planted: Option<PlantedCut>,
}

pub fn generate(model: &GraphModel, seed: Seed) -> Result<GeneratedGraph, GraphError> {
    let mut rng = seed.stream("generate").rng();
    match *model {
        GraphModel::PlantedCut { n_a, n_b, internal, crossing } => planted_cut(n_a, n_b, internal, crossing, &mut rng),
        GraphModel::RandomConnected { n, extra_edges, max_edge_weight } => {
            let graph = random_connected(n, extra_edges, max_edge_weight, &mut rng)?;
            Ok(GeneratedGraph { graph, planted: None })
        }
        GraphModel::CliquePath { k, len } => Ok(GeneratedGraph { graph: clique_path(k, len)?, planted: None }),
    }
}

fn random_tree<R: Rng>(vertices: &[VertexId], rng: &mut R) -> Vec<(VertexId, VertexId)> {
    let mut order = vertices.to_vec();
    order.shuffle(rng);
    (1..order.len()).map(|i| (order[rng.gen_range(0..i)], order[i])).collect()
}

fn half<R: Rng>(vertices: &[VertexId], internal: InternalModel, rng: &mut R) -> BTreeSet<(VertexId, VertexId)> {
    let mut pairs = BTreeSet::new();
    match internal {
        InternalModel::Clique => {
            for (i, &a) in vertices.iter().enumerate() {
                for &b in &vertices[i + 1..] {
                    pairs.insert((a.min(b), a.max(b)));
                }
            }
        }
        InternalModel::Random { p } => {
            for (a, b) in random_tree(vertices, rng) {
                pairs.insert((a.min(b), a.max(b)));
            }
            for (i, &a) in vertices.iter().enumerate() {
                for &b in &vertices[i + 1..] {
                    if rng.gen_bool(p) {
                        pairs.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
    }
    pairs
}

fn planted_cut<R: Rng>(
    n_a: usize,
    n_b: usize,
    internal: InternalModel,
    crossing: u64,
    rng: &mut R,
) -> Result<GeneratedGraph, GraphError> {
    if n_a < 1 || n_b < 1 {
        return Err(GraphError::Infeasible("both sides need at least one vertex".into()));
    }
    if crossing == 0 {
        return Err(GraphError::Infeasible("planted cut needs c >= 1 crossing edges".into()));
    }
    if crossing > (n_a * n_b) as u64 {
        return Err(GraphError::Infeasible(format!(
            "c = {crossing} exceeds the {} available crossing pairs",
            n_a * n_b
        )));
    }
    if let InternalModel::Random { p } = internal {
        if !(0.0..=1.0).contains(&p) {
            return Err(GraphError::Infeasible(format!("internal_p = {p} is not a probability")));
        }
    }
    let n = n_a + n_b;
    let side_a: Vec<VertexId> = (0..n_a as VertexId).collect();
    let side_b: Vec<VertexId> = (n_a as VertexId..n as VertexId).collect();
    let mut pairs = half(&side_a, internal, rng);
    pairs.extend(half(&side_b, internal, rng));

    let mut internal_degree = vec![0u64; n];
    for &(a, b) in &pairs {
        internal_degree[a as usize] += 1;
        internal_degree[b as usize] += 1;
    }
    if let Some(v) = internal_degree.iter().position(|&d| d <= crossing) {
        return Err(GraphError::Infeasible(format!(
            "vertex {v} has internal degree {} which is not above c = {crossing}",
            internal_degree[v]
        )));
    }

    let mut chosen = BTreeSet::new();
    while (chosen.len() as u64) < crossing {
        let a = side_a[rng.gen_range(0..n_a)];
        let b = side_b[rng.gen_range(0..n_b)];
        chosen.insert((a, b));
    }
    pairs.extend(chosen);

    let edges = pairs.into_iter().map(|(a, b)| Edge::new(a, b, 1)).collect();
    let graph = WeightedMultigraph::new(n, edges)?;
    let side = VertexSide::new(n, side_a)?;
    debug_assert_eq!(cut_weight(&graph, &side).unwrap(), crossing);
    Ok(GeneratedGraph { graph, planted: Some(PlantedCut { weight: crossing, side }) })
}

fn random_connected<R: Rng>(
    n: usize,
    extra_edges: usize,
    max_edge_weight: u64,
    rng: &mut R,
) -> Result<WeightedMultigraph, GraphError> {
    if n < 1 {
        return Err(GraphError::Infeasible("n must be at least 1".into()));
    }
    let bound = super::default_max_weight(n);
    if max_edge_weight < 1 || max_edge_weight > bound {
        return Err(GraphError::Infeasible(format!(
            "edge weights must lie in [1, {bound}], got max {max_edge_weight}"
        )));
    }
    let vertices: Vec<VertexId> = (0..n as VertexId).collect();
    let mut pairs: BTreeSet<(VertexId, VertexId)> =
        random_tree(&vertices, rng).into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
    let capacity = n * (n - 1) / 2;
    let target = (pairs.len() + extra_edges).min(capacity);
    while pairs.len() < target {
        let a = rng.gen_range(0..n as VertexId);
        let b = rng.gen_range(0..n as VertexId);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let edges = pairs.into_iter().map(|(a, b)| Edge::new(a, b, rng.gen_range(1..=max_edge_weight))).collect();
    WeightedMultigraph::new(n, edges)
}

fn clique_path(k: usize, len: usize) -> Result<WeightedMultigraph, GraphError> {
    if k < 1 || len < 1 || k * len < 2 {
        return Err(GraphError::Infeasible("clique path needs k, len >= 1 and k*len >= 2".into()));
    }
    let mut edges = Vec::new();
    for c in 0..len {
        let base = (c * k) as VertexId;
        for i in 0..k as VertexId {
            for j in i + 1..k as VertexId {
                edges.push(Edge::new(base + i, base + j, 1));
            }
        }
        if c + 1 < len {
            let last = base + k as VertexId - 1;
            edges.push(Edge::new(last, last + 1, 1));
        }
    }
    WeightedMultigraph::new(k * len, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn connected_by_bfs(g: &WeightedMultigraph) -> bool {
        let mut seen = vec![false; g.n()];
        let mut stack = vec![0u32];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for e in g.edges() {
                if e.u == x || e.v == x {
                    let y = e.other(x);
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    #[test]
    fn planted_clique_pair() {
        let model = GraphModel::PlantedCut { n_a: 10, n_b: 10, internal: InternalModel::Clique, crossing: 3 };
        let gen = generate(&model, Seed(7)).unwrap();
        let planted = gen.planted.unwrap();
        assert_eq!(planted.weight, 3);
        assert_eq!(cut_weight(&gen.graph, &planted.side).unwrap(), 3);
        assert_eq!(gen.graph.m_multi(), 45 * 2 + 3);
    }

    #[test]
    fn planted_infeasible_params() {
        for (na, nb, c) in [(10, 10, 0), (0, 10, 1), (3, 3, 2), (10, 10, 9)] {
            let model = GraphModel::PlantedCut { n_a: na, n_b: nb, internal: InternalModel::Clique, crossing: c };
            assert!(matches!(generate(&model, Seed(1)), Err(GraphError::Infeasible(_))), "{na} {nb} {c}");
        }
    }

    #[test]
    fn planted_random_halves_are_connected() {
        let model = GraphModel::PlantedCut { n_a: 12, n_b: 9, internal: InternalModel::Random { p: 0.7 }, crossing: 2 };
        let gen = generate(&model, Seed(3)).unwrap();
        assert!(connected_by_bfs(&gen.graph));
        assert_eq!(cut_weight(&gen.graph, &gen.planted.unwrap().side).unwrap(), 2);
    }

    #[test]
    fn clique_path_shape() {
        let g = generate(&GraphModel::CliquePath { k: 4, len: 5 }, Seed(0)).unwrap().graph;
        assert_eq!(g.n(), 20);
        assert_eq!(g.m(), 5 * 6 + 4);
        // one hop across each clique plus the four joining edges
        assert_eq!(g.diameter(), 9);
    }

    #[test]
    fn random_connected_is_connected() {
        for seed in 0..20 {
            let model = GraphModel::RandomConnected { n: 16, extra_edges: 10, max_edge_weight: 1 };
            let g = generate(&model, Seed(seed)).unwrap().graph;
            assert_eq!(g.n(), 16);
            assert_eq!(g.m(), 25);
            assert!(connected_by_bfs(&g));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let model = GraphModel::RandomConnected { n: 30, extra_edges: 40, max_edge_weight: 9 };
        let a = generate(&model, Seed(11)).unwrap().graph;
        let b = generate(&model, Seed(11)).unwrap().graph;
        assert_eq!(a, b);
    }
}
