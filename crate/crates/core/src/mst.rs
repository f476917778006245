//! Distributed minimum spanning trees against edge loads, and greedy tree
//! packing by repeated MSTs.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::VertexId;
use crate::sim::message::{bits_for, tag_bits};
use crate::sim::{Context, Encoder, Message, Protocol, RoundStats, SimError, Simulator, Step, Topology};
use crate::tree::{aggregate, AggValue, BfsTree, RootedSpanningTree, TreeError};

const NONE: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum MstError {
    #[error("the usable edges do not connect the graph")]
    Disconnected,
    #[error("invalid loads: {0}")]
    Loads(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Loads of the unit copies of every edge record.
///
/// Edge record `e` has `multiplicity(e)` copies. A spanning tree uses at most
/// one copy of a record, always the cheapest under the order
/// `(load, min endpoint, max endpoint, copy index)`; so after `t` uses the
/// first `t mod w` copies carry `⌊t/w⌋ + 1` trees and the rest `⌊t/w⌋`, and
/// the count of uses is all a vertex needs to remember per incident edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLoad {
    mult: Vec<u64>,
    uses: Vec<u64>,
    trees: u64,
}

impl EdgeLoad {
    /// Unloaded copies; records of multiplicity 0 are unusable.
    pub fn new(multiplicities: &[u64]) -> Self {
        EdgeLoad { mult: multiplicities.to_vec(), uses: vec![0; multiplicities.len()], trees: 0 }
    }

    /// Loads as if `trees` trees had been packed, record `e` used `uses[e]`
    /// times.
    pub fn from_uses(multiplicities: &[u64], uses: Vec<u64>, trees: u64) -> Result<Self, MstError> {
        if uses.len() != multiplicities.len() {
            return Err(MstError::Loads("one use count per edge record".into()));
        }
        for (e, (&u, &w)) in uses.iter().zip(multiplicities).enumerate() {
            if u > 0 && w == 0 {
                return Err(MstError::Loads(format!("record {e} has no copies but {u} uses")));
            }
            if u > trees {
                return Err(MstError::Loads(format!("record {e} used {u} times in {trees} trees")));
            }
        }
        Ok(EdgeLoad { mult: multiplicities.to_vec(), uses, trees })
    }

    pub fn multiplicity(&self, e: usize) -> u64 {
        self.mult[e]
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.mult
    }

    /// Trees that used some copy of record `e`.
    pub fn uses(&self, e: usize) -> u64 {
        self.uses[e]
    }

    pub fn trees(&self) -> u64 {
        self.trees
    }

    /// Load of copy `c` of record `e`.
    pub fn copy_load(&self, e: usize, c: u64) -> u64 {
        let (t, w) = (self.uses[e], self.mult[e]);
        assert!(c < w, "copy {c} of a record with {w} copies");
        t / w + u64::from(c < t % w)
    }

    /// `(load, copy)` of the copy the next tree would take.
    pub fn cheapest(&self, e: usize) -> Option<(u64, u64)> {
        let (t, w) = (self.uses[e], self.mult[e]);
        (w > 0).then(|| (t / w, t % w))
    }

    /// Sum of loads over all copies.
    pub fn total(&self) -> u64 {
        self.uses.iter().sum()
    }

    pub fn max_load(&self) -> u64 {
        (0..self.mult.len()).filter_map(|e| self.cheapest(e).map(|_| self.copy_load(e, 0))).max().unwrap_or(0)
    }

    /// Charges one tree, given by its edge records.
    pub fn add_tree(&mut self, records: &[usize]) {
        for &e in records {
            assert!(self.mult[e] > 0, "tree uses an absent edge");
            self.uses[e] += 1;
        }
        self.trees += 1;
    }
}

/// A greedy tree packing with the loads it induces.
#[derive(Clone, Debug)]
pub struct TreePacking {
    pub trees: Vec<RootedSpanningTree>,
    /// Edge records of each tree.
    pub records: Vec<Vec<usize>>,
    pub loads: EdgeLoad,
}

/// `(load, min endpoint, max endpoint)`: the order between records. Copy
/// indices only break ties between copies of one record.
type Key = (u64, VertexId, VertexId);

#[derive(Clone, Copy)]
struct FragMsg(VertexId);

impl Message for FragMsg {
    const KINDS: u32 = 1;
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.id(self.0);
    }
}

/// A candidate edge: its load in one or more digits, most significant
/// first, then its endpoints.
#[derive(Clone, Copy)]
enum CandMsg {
    /// The subtree has no candidate.
    Empty,
    /// `width` bits of the load.
    Digit(u64, u32),
    Ends(VertexId, VertexId),
}

impl Message for CandMsg {
    const KINDS: u32 = 3;
    fn encode(&self, enc: &mut Encoder<'_>) {
        match *self {
            CandMsg::Empty => {}
            CandMsg::Digit(d, width) => {
                enc.bounded(d, (1u64 << width) - 1);
            }
            CandMsg::Ends(a, b) => {
                enc.id(a).id(b);
            }
        }
    }
}

#[derive(Clone, Copy)]
enum LinkMsg {
    Route,
    Connect,
}

impl Message for LinkMsg {
    const KINDS: u32 = 2;
    fn encode(&self, _enc: &mut Encoder<'_>) {}
}

#[derive(Clone, Default)]
struct MstNode {
    frag: VertexId,
    leader: bool,
    parent: u32,
    marked: Vec<bool>,
    nbr_frag: Vec<VertexId>,
    foreign: bool,
    best: Option<Key>,
    /// Slot the best candidate came from; `NONE` for the vertex's own edge.
    best_from: u32,
    own_slot: u32,
    waiting: usize,
    partial: Vec<(u32, u64)>,
    reported: bool,
    queue: VecDeque<(u32, CandMsg)>,
    connect_slot: u32,
    core: bool,
}

impl MstNode {
    fn children(&self) -> impl Iterator<Item = u32> + '_ {
        let parent = self.parent;
        self.marked.iter().enumerate().filter(move |&(s, &m)| m && s as u32 != parent).map(|(s, _)| s as u32)
    }

    fn offer(&mut self, key: Key, from: u32) {
        if self.best.is_none_or(|b| key < b) {
            self.best = Some(key);
            self.best_from = from;
        }
    }

    fn flush(&mut self, ctx: &mut Context<'_, CandMsg>) -> Step {
        if let Some(&(slot, m)) = self.queue.front() {
            ctx.send(slot, m);
            self.queue.pop_front();
        }
        if self.queue.is_empty() {
            Step::Halt
        } else {
            Step::Continue
        }
    }
}

/// Fragment ids to every neighbor; local candidate edge.
struct Exchange<'a> {
    loads: &'a EdgeLoad,
    topo: &'a Topology,
}

impl Protocol for Exchange<'_> {
    type State = MstNode;
    type Msg = FragMsg;

    fn step(&self, ctx: &mut Context<'_, FragMsg>, st: &mut MstNode) -> Step {
        let v = ctx.node();
        if ctx.round() == 1 {
            for s in 0..ctx.degree() as u32 {
                ctx.send(s, FragMsg(st.frag));
            }
            return Step::Halt;
        }
        st.best = None;
        st.best_from = NONE;
        st.own_slot = NONE;
        st.foreign = false;
        for (s, FragMsg(f)) in ctx.inbox() {
            st.nbr_frag[s as usize] = f;
        }
        for s in 0..ctx.degree() as u32 {
            if st.nbr_frag[s as usize] == st.frag {
                continue;
            }
            st.foreign = true;
            let e = self.topo.edge_of(v, s);
            if let Some((load, _)) = self.loads.cheapest(e) {
                let u = ctx.neighbor(s);
                let key = (load, v.min(u), v.max(u));
                if st.best.is_none_or(|b| key < b) {
                    st.best = Some(key);
                    st.own_slot = s;
                }
            }
        }
        Step::Halt
    }
}

/// Convergecast of the minimum candidate to the fragment leader.
struct Report {
    /// Width of a load, `⌈log2 (trees + 1)⌉`.
    load_bits: u32,
    /// Most load bits one message can carry.
    digit_bits: u32,
}

impl Report {
    fn new(max_load: u64, bits_per_message: u32) -> Self {
        let digit_bits = bits_per_message.saturating_sub(tag_bits(CandMsg::KINDS)).max(1);
        Report { load_bits: bits_for(max_load), digit_bits }
    }

    fn digits(&self, load: u64) -> impl Iterator<Item = CandMsg> + '_ {
        let mut left = self.load_bits;
        std::iter::from_fn(move || {
            if left == 0 {
                return None;
            }
            let width = match left % self.digit_bits {
                0 => self.digit_bits,
                r => r,
            };
            left -= width;
            Some(CandMsg::Digit((load >> left) & ((1u64 << width) - 1), width))
        })
    }
}

impl Protocol for Report {
    type State = MstNode;
    type Msg = CandMsg;

    fn step(&self, ctx: &mut Context<'_, CandMsg>, st: &mut MstNode) -> Step {
        if ctx.round() == 1 {
            st.waiting = st.children().count();
            st.partial.clear();
            st.reported = false;
            st.queue.clear();
        }
        for (s, m) in ctx.inbox() {
            match m {
                CandMsg::Empty => st.waiting -= 1,
                CandMsg::Digit(d, width) => match st.partial.iter_mut().find(|(p, _)| *p == s) {
                    Some((_, acc)) => *acc = (*acc << width) | d,
                    None => st.partial.push((s, d)),
                },
                CandMsg::Ends(a, b) => {
                    let load = match st.partial.iter().position(|&(p, _)| p == s) {
                        Some(i) => st.partial.swap_remove(i).1,
                        None => 0,
                    };
                    st.offer((load, a, b), s);
                    st.waiting -= 1;
                }
            }
        }
        if st.waiting == 0 && !st.reported {
            st.reported = true;
            if st.parent != NONE {
                match st.best {
                    Some((load, a, b)) => {
                        let parent = st.parent;
                        st.queue.extend(self.digits(load).map(|m| (parent, m)));
                        st.queue.push_back((parent, CandMsg::Ends(a, b)));
                    }
                    None => st.queue.push_back((st.parent, CandMsg::Empty)),
                }
            }
        }
        st.flush(ctx)
    }
}

/// Leaders route a `Connect` to the owner of the fragment's best edge, which
/// sends it across. An edge chosen from both sides is the core of the merged
/// fragment; its smaller endpoint leads.
struct Connect;

impl Connect {
    fn follow(ctx: &mut Context<'_, LinkMsg>, st: &mut MstNode) {
        if st.best_from == NONE {
            let s = st.own_slot;
            st.core = st.marked[s as usize] && ctx.node() < ctx.neighbor(s);
            st.marked[s as usize] = true;
            st.connect_slot = s;
            ctx.send(s, LinkMsg::Connect);
        } else {
            ctx.send(st.best_from, LinkMsg::Route);
        }
    }
}

impl Protocol for Connect {
    type State = MstNode;
    type Msg = LinkMsg;

    fn step(&self, ctx: &mut Context<'_, LinkMsg>, st: &mut MstNode) -> Step {
        if ctx.round() == 1 {
            st.connect_slot = NONE;
            st.core = false;
            if st.leader && st.best.is_some() {
                Self::follow(ctx, st);
            }
        }
        for (s, m) in ctx.inbox() {
            match m {
                LinkMsg::Route => Self::follow(ctx, st),
                LinkMsg::Connect => {
                    st.marked[s as usize] = true;
                    if st.connect_slot == s && ctx.node() < ctx.neighbor(s) {
                        st.core = true;
                    }
                }
            }
        }
        Step::Halt
    }
}

/// New fragment ids flow out from the starting vertices over marked edges,
/// which also orients every fragment towards its leader.
struct Flood;

impl Protocol for Flood {
    type State = MstNode;
    type Msg = FragMsg;

    fn step(&self, ctx: &mut Context<'_, FragMsg>, st: &mut MstNode) -> Step {
        let v = ctx.node();
        let mut from = None;
        if ctx.round() == 1 && st.leader {
            st.frag = v;
            st.parent = NONE;
            from = Some((v, NONE));
        }
        for (s, FragMsg(id)) in ctx.inbox() {
            st.frag = id;
            st.parent = s;
            st.leader = false;
            from = Some((id, s));
        }
        if let Some((id, skip)) = from {
            for s in 0..st.marked.len() as u32 {
                if st.marked[s as usize] && s != skip {
                    ctx.send(s, FragMsg(id));
                }
            }
        }
        Step::Halt
    }
}

/// Minimum spanning tree of the copies with positive multiplicity, under the
/// order `(load, min endpoint, max endpoint, copy index)`: Borůvka phases of
/// fragment merging, each ending with a network-wide check over `bfs` for
/// fragments that can still grow. The tree is rooted at vertex 0. Returns the
/// tree and its edge records.
pub fn distributed_mst(
    sim: &mut Simulator<'_>,
    bfs: &BfsTree,
    loads: &EdgeLoad,
) -> Result<(RootedSpanningTree, Vec<usize>, RoundStats), MstError> {
    let topo = sim.topology();
    let n = topo.n();
    let mut stats = RoundStats::default();
    let mut states: Vec<MstNode> = (0..n as VertexId)
        .map(|v| MstNode {
            frag: v,
            leader: true,
            parent: NONE,
            marked: vec![false; topo.degree(v)],
            nbr_frag: vec![0; topo.degree(v)],
            ..Default::default()
        })
        .collect();
    let report = Report::new(loads.trees(), sim.config().bits_per_message);
    loop {
        let s = sim.run(&Exchange { loads, topo }, &mut states)?;
        stats.record("exchange", &s);
        let s = sim.run(&report, &mut states)?;
        stats.record("report", &s);
        let values: Vec<AggValue> = states
            .iter()
            .map(|st| {
                if st.leader && st.best.is_some() {
                    AggValue::some(0, 0)
                } else if st.foreign {
                    AggValue::some(1, 0)
                } else {
                    AggValue::NONE
                }
            })
            .collect();
        let (verdict, s) = aggregate(sim, bfs, &values, 1, 0)?;
        stats.record("check", &s);
        match (verdict.present, verdict.a) {
            (false, _) => break,
            (true, 1) => return Err(MstError::Disconnected),
            _ => {}
        }
        let s = sim.run(&Connect, &mut states)?;
        stats.record("connect", &s);
        for st in &mut states {
            st.leader = st.core;
        }
        let s = sim.run(&Flood, &mut states)?;
        stats.record("merge", &s);
    }
    for (v, st) in states.iter_mut().enumerate() {
        st.leader = v == 0;
    }
    let s = sim.run(&Flood, &mut states)?;
    stats.record("orient", &s);

    let mut parent = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(n.saturating_sub(1));
    for (v, st) in states.iter().enumerate() {
        let v = v as VertexId;
        if st.parent == NONE {
            parent.push(v);
        } else {
            parent.push(topo.neighbor(v, st.parent));
            records.push(topo.edge_of(v, st.parent));
        }
    }
    records.sort_unstable();
    let tree = RootedSpanningTree::from_parents(parent)?;
    Ok((tree, records, stats))
}

/// `count` trees, each an MST against the loads of the ones before it.
pub fn greedy_tree_packing(
    sim: &mut Simulator<'_>,
    bfs: &BfsTree,
    multiplicities: &[u64],
    count: usize,
) -> Result<(TreePacking, RoundStats), MstError> {
    let mut loads = EdgeLoad::new(multiplicities);
    let mut trees = Vec::with_capacity(count);
    let mut all_records = Vec::with_capacity(count);
    let mut stats = RoundStats::default();
    for _ in 0..count {
        let (tree, records, s) = distributed_mst(sim, bfs, &loads)?;
        stats.record("mst", &s);
        loads.add_tree(&records);
        trees.push(tree);
        all_records.push(records);
    }
    Ok((TreePacking { trees, records: all_records, loads }, stats))
}
