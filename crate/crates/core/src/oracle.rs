//! Centralized exact references. Nothing here touches the simulator.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{cut_weight, VertexId, VertexSide, WeightedMultigraph};
use crate::mst::EdgeLoad;
use crate::tree::{RootedSpanningTree, TreeLabels};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("a cut needs at least two vertices")]
    TooSmall,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("brute force is limited to {max} vertices, got {n}")]
    TooLarge { n: usize, max: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMinCut {
    pub weight: u64,
    pub side: VertexSide,
}

/// Largest graph [`brute_force_min_cut`] accepts.
pub const BRUTE_FORCE_MAX_N: usize = 12;

/// Stoer–Wagner on a dense weight matrix, `O(n³)`.
pub fn stoer_wagner(g: &WeightedMultigraph) -> Result<ExactMinCut, OracleError> {
    let n = g.n();
    if n < 2 {
        return Err(OracleError::TooSmall);
    }
    let mut w = vec![vec![0u64; n]; n];
    for e in g.edges() {
        w[e.u as usize][e.v as usize] += e.w;
        w[e.v as usize][e.u as usize] += e.w;
    }
    // members[i]: original vertices merged into super-vertex i.
    let mut members: Vec<Vec<VertexId>> = (0..n as VertexId).map(|v| vec![v]).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut best: Option<(u64, Vec<VertexId>)> = None;
    while alive.len() > 1 {
        let mut added = vec![false; n];
        let mut conn = vec![0u64; n];
        let mut prev = alive[0];
        let mut last = alive[0];
        for step in 0..alive.len() {
            let next = *alive
                .iter()
                .filter(|&&x| !added[x])
                .max_by_key(|&&x| (conn[x], std::cmp::Reverse(x)))
                .expect("vertex left");
            added[next] = true;
            if step == alive.len() - 1 && best.as_ref().is_none_or(|(b, _)| conn[next] < *b) {
                best = Some((conn[next], members[next].clone()));
            }
            prev = last;
            last = next;
            for &x in &alive {
                conn[x] += w[next][x];
            }
        }
        let (s, t) = (prev, last);
        let moved = std::mem::take(&mut members[t]);
        members[s].extend(moved);
        for &x in &alive {
            w[s][x] += w[t][x];
            w[x][s] = w[s][x];
        }
        w[s][s] = 0;
        alive.retain(|&x| x != t);
    }
    let (weight, side) = best.expect("n >= 2");
    if weight == 0 {
        return Err(OracleError::Disconnected);
    }
    let side = VertexSide::new(n, side).expect("proper side").normalized();
    debug_assert_eq!(cut_weight(g, &side).ok(), Some(weight));
    Ok(ExactMinCut { weight, side })
}

/// Scans all `2^(n-1) - 1` bipartitions.
pub fn brute_force_min_cut(g: &WeightedMultigraph) -> Result<ExactMinCut, OracleError> {
    let n = g.n();
    if n < 2 {
        return Err(OracleError::TooSmall);
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(OracleError::TooLarge { n, max: BRUTE_FORCE_MAX_N });
    }
    let mut best: Option<(u64, u32)> = None;
    // Vertex n-1 always stays outside the side.
    for mask in 1u32..(1 << (n - 1)) {
        let weight: u64 = g.edges().iter().filter(|e| ((mask >> e.u) & 1) != ((mask >> e.v) & 1)).map(|e| e.w).sum();
        if best.is_none_or(|(b, _)| weight < b) {
            best = Some((weight, mask));
        }
    }
    let (weight, mask) = best.expect("n >= 2");
    if weight == 0 {
        return Err(OracleError::Disconnected);
    }
    let side =
        VertexSide::new(n, (0..n as VertexId).filter(|&v| (mask >> v) & 1 == 1)).expect("proper side").normalized();
    Ok(ExactMinCut { weight, side })
}

/// Kruskal over every unit copy, ordered by `(load, min endpoint,
/// max endpoint, copy index)`. Returns the chosen `(edge record, copy)` pairs
/// in selection order and their total load.
pub fn kruskal_with_order(g: &WeightedMultigraph, loads: &EdgeLoad) -> Result<(Vec<(usize, u64)>, u64), OracleError> {
    let mut copies = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        for c in 0..loads.multiplicity(i) {
            copies.push((loads.copy_load(i, c), e.u.min(e.v), e.u.max(e.v), c, i));
        }
    }
    copies.sort_unstable();
    let mut dsu: Vec<usize> = (0..g.n()).collect();
    fn find(d: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while d[r] != r {
            r = d[r];
        }
        let mut x = x;
        while d[x] != r {
            let nx = d[x];
            d[x] = r;
            x = nx;
        }
        r
    }
    let mut chosen = Vec::new();
    let mut total = 0;
    for (load, a, b, c, i) in copies {
        let (ra, rb) = (find(&mut dsu, a as usize), find(&mut dsu, b as usize));
        if ra != rb {
            dsu[ra] = rb;
            chosen.push((i, c));
            total += load;
        }
    }
    if chosen.len() + 1 != g.n() {
        return Err(OracleError::Disconnected);
    }
    Ok((chosen, total))
}

/// Bridges of a multigraph given as a list of unit edges, as `(min, max)`.
/// An edge listed twice is never a bridge.
pub fn dfs_bridges(n: usize, edges: &[(VertexId, VertexId)]) -> BTreeSet<(VertexId, VertexId)> {
    let mut adj = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        adj[u as usize].push((v as usize, i));
        adj[v as usize].push((u as usize, i));
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    let mut bridges = BTreeSet::new();
    for s in 0..n {
        if disc[s] != usize::MAX {
            continue;
        }
        disc[s] = time;
        low[s] = time;
        time += 1;
        // (vertex, edge id used to enter it, next adjacency index)
        let mut stack = vec![(s, usize::MAX, 0usize)];
        while let Some(&mut (x, via, ref mut next)) = stack.last_mut() {
            if *next < adj[x].len() {
                let (y, id) = adj[x][*next];
                *next += 1;
                if id == via {
                    continue;
                }
                if disc[y] == usize::MAX {
                    disc[y] = time;
                    low[y] = time;
                    time += 1;
                    stack.push((y, id, 0));
                } else {
                    low[x] = low[x].min(disc[y]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[x]);
                    if low[x] > disc[p] {
                        bridges.insert((p.min(x) as VertexId, p.max(x) as VertexId));
                    }
                }
            }
        }
    }
    bridges
}

/// `pre`, `size`, `low` and `high` by direct evaluation of the recurrences.
/// `sampled` lists the sampled edges (parallel copies may repeat).
pub fn tree_labels(tree: &RootedSpanningTree, sampled: &[(VertexId, VertexId)]) -> TreeLabels {
    let n = tree.n();
    let order = tree.preorder_walk();
    let mut pre = vec![0u32; n];
    for (i, &v) in order.iter().enumerate() {
        pre[v as usize] = i as u32;
    }
    let mut size = vec![1u32; n];
    let mut low = pre.clone();
    let mut high = pre.clone();
    for &(u, v) in sampled {
        let (u, v) = (u as usize, v as usize);
        low[u] = low[u].min(pre[v]);
        high[u] = high[u].max(pre[v]);
        low[v] = low[v].min(pre[u]);
        high[v] = high[v].max(pre[u]);
    }
    for &v in order.iter().rev() {
        if let Some(p) = tree.parent(v) {
            let (p, v) = (p as usize, v as usize);
            size[p] += size[v];
            low[p] = low[p].min(low[v]);
            high[p] = high[p].max(high[v]);
        }
    }
    TreeLabels { pre, size, low, high }
}

/// Probability that a cut of weight `w` keeps at least one edge when every
/// unit edge survives with probability `1 - 2^(-1/κ)`.
pub fn expected_y(w: u64, kappa: f64) -> f64 {
    1.0 - (-(w as f64) / kappa).exp2()
}
