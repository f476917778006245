//! The approximate minimum cut: outer sampling schedule, greedy packings of
//! each sample, and the threshold sweep that tests every packed tree.

mod schedule;
mod tester;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{cut_weight, sample_subgraph, GraphError, VertexId, VertexSide, WeightedMultigraph};
use crate::mst::{greedy_tree_packing, MstError};
use crate::rng::Seed;
use crate::sim::{NetworkConfig, RoundStats, SimError, Simulator, Topology};
use crate::tree::{build_bfs, prepare_tree, PreparedTree, RootedSpanningTree, TreeError};

pub use schedule::{
    gamma_sweep, outer_schedule, solve_epsilon_prime, EpsilonSchedule, OuterStep, PackingPolicy, PAPER_COUNT_CAP,
};
pub use tester::{sample_lane_masks, LaneSampler, TestOutcome, Tester, TreeCut};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("ε must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("κ must be at least 1, got {0}")]
    InvalidKappa(f64),
    #[error("packing needs {count:.3e} trees, above the cap of {cap}")]
    PackingTooLarge { count: f64, cap: u64 },
    #[error("a cut needs at least two vertices")]
    TooSmall,
    #[error("({0},{1}) is not an edge of the tree")]
    NotTreeEdge(VertexId, VertexId),
    #[error("no cut found after the last iteration")]
    NoCut { stats: Box<RoundStats>, trace: Vec<TraceEvent> },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Mst(MstError),
}

impl From<MstError> for DriverError {
    fn from(e: MstError) -> Self {
        match e {
            MstError::Sim(s) => DriverError::Sim(s),
            MstError::Tree(t) => DriverError::Tree(t),
            e => DriverError::Mst(e),
        }
    }
}

impl DriverError {
    /// The simulator error underneath, if any.
    pub fn sim_error(&self) -> Option<&SimError> {
        match self {
            DriverError::Sim(s) | DriverError::Tree(TreeError::Sim(s)) => Some(s),
            _ => None,
        }
    }
}

/// The subtree of `child` in `tree`, read off the preorder range
/// `[pre(child), pre(child) + size(child) − 1]`.
pub fn side_marking(
    tree: &RootedSpanningTree,
    pre: &[u32],
    size: &[u32],
    edge: (VertexId, VertexId),
) -> Result<VertexSide, DriverError> {
    let (u, v) = edge;
    let child = if tree.parent(v) == Some(u) {
        v
    } else if tree.parent(u) == Some(v) {
        u
    } else {
        return Err(DriverError::NotTreeEdge(u, v));
    };
    let first = pre[child as usize];
    let last = first + size[child as usize] - 1;
    Ok(VertexSide::from_mask(pre.iter().map(|&p| p >= first && p <= last).collect())?)
}

/// Where an output cut came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSource {
    pub iteration: u32,
    pub tree: usize,
    /// `(parent, child)`.
    pub edge: (VertexId, VertexId),
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutResult {
    /// Subtree of the child endpoint of `source.edge`.
    pub side: VertexSide,
    /// Exact weight in the input graph.
    pub weight: u64,
    pub source: CutSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Iteration { i: u32, x_lo: f64, x_hi: f64, p: f64, trees: usize, sampled_edges: u64 },
    Skipped { i: u32, reason: String },
    Test { i: u32, gamma: f64, kappa: f64, tree: usize, trials: u64, found: Option<u64> },
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub policy: PackingPolicy,
    pub seed: Seed,
    pub network: Option<NetworkConfig>,
    /// Keep going after the first cut and return the lightest one.
    pub exhaustive: bool,
    /// Known bounds on `λ`; iterations and thresholds outside are skipped.
    pub lambda_interval: Option<(f64, f64)>,
    /// Override of the trial count `k`.
    pub trials: Option<u64>,
}

impl SolverConfig {
    pub fn new(epsilon: f64, seed: Seed) -> Self {
        SolverConfig {
            epsilon,
            policy: PackingPolicy::default(),
            seed,
            network: None,
            exhaustive: false,
            lambda_interval: None,
            trials: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub cut: CutResult,
    pub schedule: EpsilonSchedule,
    pub stats: RoundStats,
    pub trace: Vec<TraceEvent>,
}

fn overlaps(lo: f64, hi: f64, interval: Option<(f64, f64)>) -> bool {
    interval.is_none_or(|(a, b)| hi >= a && lo <= b)
}

/// The full algorithm on `g`. Each vertex of `g` is a node of the network.
pub fn approx_min_cut(g: &WeightedMultigraph, config: &SolverConfig) -> Result<Solution, DriverError> {
    let n = g.n();
    if n < 2 {
        return Err(DriverError::TooSmall);
    }
    let mut schedule = EpsilonSchedule::new(config.epsilon, n)?;
    if let Some(k) = config.trials {
        schedule = EpsilonSchedule::with_trials(schedule.epsilon, schedule.epsilon_prime, k);
    }
    let eps = schedule.epsilon_prime;
    let topo = Topology::new(g);
    let network = config.network.unwrap_or_else(|| NetworkConfig::for_n(n));
    let mut sim = Simulator::new(&topo, network)?;
    let mut stats = RoundStats::default();
    let mut trace = Vec::new();
    let (bfs, s) = build_bfs(&mut sim)?;
    stats.record("bfs", &s);

    let w_max = g.edges().iter().map(|e| e.w).max().unwrap_or(1);
    let mut tester = Tester::new(n);
    let mut best: Option<CutResult> = None;
    let mut calls = 0u64;
    for step in outer_schedule(n, w_max, &schedule) {
        let top = (1.0 + eps) / (1.0 - eps) * step.x_hi;
        if !overlaps(step.x_lo, top, config.lambda_interval) {
            trace.push(TraceEvent::Skipped { i: step.i, reason: "outside the λ interval".into() });
            continue;
        }
        let h = sample_subgraph(g, step.p, config.seed.stream("h").index(u64::from(step.i)))?;
        let count = config.policy.count(n, h.total(), &schedule)?;
        let packing = match greedy_tree_packing(&mut sim, &bfs, h.multiplicities(), count) {
            Ok((p, s)) => {
                stats.record("pack", &s);
                p
            }
            Err(MstError::Disconnected) => {
                warn!("iteration {}: sample is disconnected, skipped", step.i);
                trace.push(TraceEvent::Skipped { i: step.i, reason: "sample disconnected".into() });
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        trace.push(TraceEvent::Iteration {
            i: step.i,
            x_lo: step.x_lo,
            x_hi: step.x_hi,
            p: step.p,
            trees: count,
            sampled_edges: h.total(),
        });
        info!("iteration {}: X in [{:.1}, {:.1}], {} trees", step.i, step.x_lo, step.x_hi, count);
        let mut prepared: Vec<PreparedTree> = Vec::with_capacity(count);
        for t in &packing.trees {
            let p = prepare_tree(&mut sim, &bfs, t)?;
            stats.record("label", p.stats());
            prepared.push(p);
        }
        for gamma in gamma_sweep(step.x_lo, step.x_hi, eps) {
            let kappa = (1.0 + eps) * gamma;
            if !overlaps(gamma, kappa, config.lambda_interval) {
                continue;
            }
            for (t, prep) in prepared.iter().enumerate() {
                let seed = config.seed.stream("test").index(calls);
                calls += 1;
                let out = tester.run(&mut sim, &bfs, prep, g, kappa, &schedule, seed)?;
                stats.record("test", &out.stats);
                let found = out.cut.map(|c| {
                    let weight = cut_weight(g, &c.side).expect("side over g");
                    CutResult {
                        side: c.side,
                        weight,
                        source: CutSource { iteration: step.i, tree: t, edge: (c.parent, c.child), gamma },
                    }
                });
                trace.push(TraceEvent::Test {
                    i: step.i,
                    gamma,
                    kappa,
                    tree: t,
                    trials: out.trials,
                    found: found.as_ref().map(|c| c.weight),
                });
                if let Some(cut) = found {
                    if !config.exhaustive {
                        return Ok(Solution { cut, schedule, stats, trace });
                    }
                    if best.as_ref().is_none_or(|b| cut.weight < b.weight) {
                        best = Some(cut);
                    }
                }
            }
        }
    }
    match best {
        Some(cut) => Ok(Solution { cut, schedule, stats, trace }),
        None => Err(DriverError::NoCut { stats: Box::new(stats), trace }),
    }
}
