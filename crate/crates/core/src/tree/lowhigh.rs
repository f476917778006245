//! `low`/`high` aggregation and the bridge predicate.
//!
//! The protocol runs on `L` independent samples at once, one per lane. Its
//! message pattern depends only on the tree, never on the sampled edges, so
//! every lane follows the same transcript as a separate network would; a
//! batched message stands for `L` messages of identical size, one per lane,
//! and is metered as one of them.

use std::cell::RefCell;
use std::collections::VecDeque;

use crate::graph::{SampledSubgraph, VertexId};
use crate::sim::{Context, Encoder, Message, Protocol, RoundStats, SimError, Simulator, Step, Topology};

use super::preorder::{PreparedTree, ROLE_CHILD};
use super::{BfsTree, TreeError};

/// Maximum lane count; lane membership is a bit of a `u64`.
pub const MAX_LANES: usize = 64;

#[derive(Clone, Copy)]
enum LhMsg<const L: usize> {
    /// Tree child to tree parent: the fragment-internal aggregate until the
    /// parent has heard from all its fragment children, a correction after
    /// that, or the full subtree value over a fragment link.
    Val([u32; L], [u32; L]),
    /// Fragment record over the BFS tree: up when received from a child,
    /// down when received from the parent.
    Cast(VertexId, [u32; L], [u32; L]),
}

impl<const L: usize> Message for LhMsg<L> {
    const KINDS: u32 = 2;
    fn encode(&self, enc: &mut Encoder<'_>) {
        match self {
            LhMsg::Val(lo, hi) => {
                enc.id(lo[0]).id(hi[0]);
            }
            LhMsg::Cast(f, lo, hi) => {
                enc.id(*f).id(lo[0]).id(hi[0]);
            }
        }
    }
}

#[derive(Clone)]
struct LhNode<const L: usize> {
    lo: [u32; L],
    hi: [u32; L],
    waiting: u32,
    fixes: u32,
    aggregated: bool,
    queue: VecDeque<(u32, LhMsg<L>)>,
}

impl<const L: usize> Default for LhNode<L> {
    fn default() -> Self {
        LhNode { lo: [0; L], hi: [0; L], waiting: 0, fixes: 0, aggregated: false, queue: VecDeque::new() }
    }
}

fn fold<const L: usize>(lo: &mut [u32; L], hi: &mut [u32; L], l2: &[u32; L], h2: &[u32; L]) {
    for i in 0..L {
        lo[i] = lo[i].min(l2[i]);
        hi[i] = hi[i].max(h2[i]);
    }
}

struct RootScratch<const L: usize> {
    lo: Vec<[u32; L]>,
    hi: Vec<[u32; L]>,
    received: usize,
}

struct LowHighRun<'a, const L: usize> {
    topo: &'a Topology,
    bfs: &'a BfsTree,
    prep: &'a PreparedTree,
    masks: &'a [u64],
    root: RefCell<RootScratch<L>>,
}

impl<const L: usize> LowHighRun<'_, L> {
    fn is_frag_root(&self, v: VertexId) -> bool {
        self.prep.decomposition.is_root(v)
    }

    /// The fragment-internal aggregate of `v` is complete.
    fn aggregated(&self, v: VertexId, st: &mut LhNode<L>) {
        st.aggregated = true;
        if !self.is_frag_root(v) {
            let p = self.prep.slots.parent(v).expect("non-root has a parent");
            st.queue.push_back((p, LhMsg::Val(st.lo, st.hi)));
        } else if v == self.bfs.root() {
            let (lo, hi) = (st.lo, st.hi);
            self.at_root(v, v, &lo, &hi, st);
        } else {
            let p = self.bfs.parent_slot(v).expect("non-root has a BFS parent");
            st.queue.push_back((p, LhMsg::Cast(v, st.lo, st.hi)));
        }
    }

    /// A fragment root learned the aggregate of its whole subtree.
    fn settled(&self, v: VertexId, lo: &[u32; L], hi: &[u32; L], st: &mut LhNode<L>) {
        st.lo = *lo;
        st.hi = *hi;
        if let Some(p) = self.prep.slots.parent(v) {
            st.queue.push_back((p, LhMsg::Val(*lo, *hi)));
        }
    }

    /// Vertex 0 collects fragment aggregates; once all are in it folds them
    /// over the contracted tree and sends each fragment its subtree value.
    fn at_root(&self, v: VertexId, frag: VertexId, lo: &[u32; L], hi: &[u32; L], st: &mut LhNode<L>) {
        let c = &self.prep.contracted;
        let mut scratch = self.root.borrow_mut();
        let i = c.index(frag);
        scratch.lo[i] = *lo;
        scratch.hi[i] = *hi;
        scratch.received += 1;
        if scratch.received < c.len() {
            return;
        }
        let RootScratch { lo: slo, hi: shi, .. } = &mut *scratch;
        for &i in &c.bottom_up {
            let p = c.parent[i as usize];
            if p != u32::MAX {
                let (l, h) = (slo[i as usize], shi[i as usize]);
                fold(&mut slo[p as usize], &mut shi[p as usize], &l, &h);
            }
        }
        for (i, &f) in c.frags.iter().enumerate() {
            if f == v {
                self.settled(v, &slo[i], &shi[i], st);
            } else {
                let hop = self.prep.routes.next_hop(v, f).expect("route");
                st.queue.push_back((hop, LhMsg::Cast(f, slo[i], shi[i])));
            }
        }
    }
}

impl<const L: usize> Protocol for LowHighRun<'_, L> {
    type State = LhNode<L>;
    type Msg = LhMsg<L>;

    fn step(&self, ctx: &mut Context<'_, LhMsg<L>>, st: &mut LhNode<L>) -> Step {
        let v = ctx.node();
        let vi = v as usize;
        let prep = self.prep;
        if ctx.round() == 1 {
            let pre = prep.pre[vi];
            st.lo = [pre; L];
            st.hi = [pre; L];
            // Scanning neighbors by `pre` outwards from `v`, the first
            // sampled one in each direction settles a lane.
            let first = self.topo.channel(v, 0);
            let chans = &prep.by_pre[first..first + ctx.degree()];
            let all = if L == 64 { u64::MAX } else { (1u64 << L) - 1 };
            let mut open = all;
            for &ch in chans {
                let q = prep.neighbor_pre[ch as usize];
                if q >= pre || open == 0 {
                    break;
                }
                let mut m = self.masks[self.topo.edge_at(ch as usize)] & open;
                open &= !m;
                while m != 0 {
                    st.lo[m.trailing_zeros() as usize] = q;
                    m &= m - 1;
                }
            }
            open = all;
            for &ch in chans.iter().rev() {
                let q = prep.neighbor_pre[ch as usize];
                if q <= pre || open == 0 {
                    break;
                }
                let mut m = self.masks[self.topo.edge_at(ch as usize)] & open;
                open &= !m;
                while m != 0 {
                    st.hi[m.trailing_zeros() as usize] = q;
                    m &= m - 1;
                }
            }
            st.waiting = prep.inner_children[vi];
            st.fixes = prep.fix_wait[vi];
            st.aggregated = false;
            st.queue.clear();
            if st.waiting == 0 {
                self.aggregated(v, st);
            }
        }
        let bfs_parent = self.bfs.parent_slot(v);
        for (slot, msg) in ctx.inbox() {
            match msg {
                LhMsg::Val(lo, hi) => {
                    if !st.aggregated && prep.role[ctx.channel(slot)] == ROLE_CHILD {
                        fold(&mut st.lo, &mut st.hi, &lo, &hi);
                        st.waiting -= 1;
                        if st.waiting == 0 {
                            self.aggregated(v, st);
                        }
                    } else if !self.is_frag_root(v) {
                        fold(&mut st.lo, &mut st.hi, &lo, &hi);
                        st.fixes -= 1;
                        if st.fixes == 0 && prep.sends_fix[vi] {
                            let p = prep.slots.parent(v).expect("non-root has a parent");
                            st.queue.push_back((p, LhMsg::Val(st.lo, st.hi)));
                        }
                    }
                }
                LhMsg::Cast(f, lo, hi) => {
                    if Some(slot) == bfs_parent {
                        if f == v {
                            self.settled(v, &lo, &hi, st);
                        } else {
                            let hop = prep.routes.next_hop(v, f).expect("route");
                            st.queue.push_back((hop, msg));
                        }
                    } else if let Some(p) = bfs_parent {
                        st.queue.push_back((p, msg));
                    } else {
                        self.at_root(v, f, &lo, &hi, st);
                    }
                }
            }
        }

        let mut i = 0;
        while i < st.queue.len() {
            let slot = st.queue[i].0;
            if ctx.can_send(slot) {
                let (_, msg) = st.queue.remove(i).expect("index in range");
                ctx.send(slot, msg);
            } else {
                i += 1;
            }
        }
        if st.queue.is_empty() {
            Step::Halt
        } else {
            Step::Continue
        }
    }
}

/// Labels against one sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowHigh {
    pub low: Vec<u32>,
    pub high: Vec<u32>,
}

/// Reusable per-node state for repeated bridge detection on one tree, `L`
/// samples per run.
pub struct BridgeFinder<const L: usize = 1> {
    states: Vec<LhNode<L>>,
    lo: Vec<[u32; L]>,
    hi: Vec<[u32; L]>,
}

impl<const L: usize> BridgeFinder<L> {
    pub fn new(n: usize) -> Self {
        assert!((1..=MAX_LANES).contains(&L), "1 to 64 lanes");
        BridgeFinder { states: vec![LhNode::default(); n], lo: Vec::new(), hi: Vec::new() }
    }

    /// One aggregation. `masks[e]` has bit `l` set when edge record `e` has
    /// at least one copy in the sample of lane `l`. Afterwards each vertex
    /// holds its `low`/`high` per lane.
    pub fn run(
        &mut self,
        sim: &mut Simulator<'_>,
        bfs: &BfsTree,
        prep: &PreparedTree,
        masks: &[u64],
    ) -> Result<RoundStats, SimError> {
        let f = prep.contracted.len();
        let mut lo = std::mem::take(&mut self.lo);
        let mut hi = std::mem::take(&mut self.hi);
        lo.resize(f, [0; L]);
        hi.resize(f, [0; L]);
        let scratch = RootScratch { lo, hi, received: 0 };
        let run = LowHighRun { topo: sim.topology(), bfs, prep, masks, root: RefCell::new(scratch) };
        let stats = sim.run(&run, &mut self.states);
        let scratch = run.root.into_inner();
        self.lo = scratch.lo;
        self.hi = scratch.hi;
        stats
    }

    pub fn low(&self, v: VertexId) -> &[u32; L] {
        &self.states[v as usize].lo
    }

    pub fn high(&self, v: VertexId) -> &[u32; L] {
        &self.states[v as usize].hi
    }

    /// Lanes in which the tree edge above `v` is a bridge of sample + `T`,
    /// decided by `v` from its own labels.
    pub fn bridge_lanes(&self, prep: &PreparedTree, v: VertexId) -> u64 {
        let st = &self.states[v as usize];
        let pre = prep.pre[v as usize];
        let last = pre + prep.size[v as usize] - 1;
        let mut mask = 0u64;
        for l in 0..L {
            mask |= u64::from(st.lo[l] >= pre && st.hi[l] <= last) << l;
        }
        mask
    }
}

fn single_lane(sampled: &SampledSubgraph<'_>) -> Vec<u64> {
    sampled.multiplicities().iter().map(|&m| u64::from(m > 0)).collect()
}

pub fn compute_low_high(
    sim: &mut Simulator<'_>,
    bfs: &BfsTree,
    prep: &PreparedTree,
    sampled: &SampledSubgraph<'_>,
) -> Result<(LowHigh, RoundStats), TreeError> {
    let n = prep.tree.n();
    let mut finder = BridgeFinder::<1>::new(n);
    let stats = finder.run(sim, bfs, prep, &single_lane(sampled))?;
    let low = (0..n as VertexId).map(|v| finder.low(v)[0]).collect();
    let high = (0..n as VertexId).map(|v| finder.high(v)[0]).collect();
    Ok((LowHigh { low, high }, stats))
}

/// Tree edges `(parent, child)` that are bridges of `sampled + T`, by child.
pub fn find_bridges(
    sim: &mut Simulator<'_>,
    bfs: &BfsTree,
    prep: &PreparedTree,
    sampled: &SampledSubgraph<'_>,
) -> Result<(Vec<(VertexId, VertexId)>, RoundStats), TreeError> {
    let mut finder = BridgeFinder::<1>::new(prep.tree.n());
    let stats = finder.run(sim, bfs, prep, &single_lane(sampled))?;
    let bridges = prep.tree.edges().filter(|&(_, v)| finder.bridge_lanes(prep, v) != 0).collect();
    Ok((bridges, stats))
}
