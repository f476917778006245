//! Pipelined traffic between fragment roots and vertex 0 over the BFS tree,
//! plus a generic convergecast-and-broadcast.

use std::collections::VecDeque;

use crate::graph::VertexId;
use crate::sim::{Context, Encoder, Message, Protocol, RoundStats, SimError, Simulator, Step};

use super::BfsTree;

/// One record of a fragment: `frag` is the id of the fragment root, `a` and
/// `b` are values in `[0, n)`. Encoded as three ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CastRecord {
    pub frag: VertexId,
    pub a: u32,
    pub b: u32,
}

/// Next hop towards each fragment root, learned while its records travelled up.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Routes {
    table: Vec<Vec<(VertexId, u32)>>,
}

impl Routes {
    pub fn next_hop(&self, v: VertexId, frag: VertexId) -> Option<u32> {
        let t = &self.table[v as usize];
        t.binary_search_by_key(&frag, |&(f, _)| f).ok().map(|i| t[i].1)
    }
}

#[derive(Clone, Copy)]
enum UpMsg {
    Rec(CastRecord),
    Done,
}

impl Message for UpMsg {
    const KINDS: u32 = 2;
    fn encode(&self, enc: &mut Encoder<'_>) {
        if let UpMsg::Rec(r) = self {
            enc.id(r.frag).id(r.a).id(r.b);
        }
    }
}

#[derive(Clone, Default)]
struct UpNode {
    own: Option<CastRecord>,
    queue: VecDeque<CastRecord>,
    waiting: usize,
    done_sent: bool,
    routes: Vec<(VertexId, u32)>,
    received: Vec<CastRecord>,
}

struct Up<'a> {
    bfs: &'a BfsTree,
}

impl Protocol for Up<'_> {
    type State = UpNode;
    type Msg = UpMsg;

    fn step(&self, ctx: &mut Context<'_, UpMsg>, st: &mut UpNode) -> Step {
        let v = ctx.node();
        let parent = self.bfs.parent_slot(v);
        if ctx.round() == 1 {
            st.waiting = self.bfs.children(v).len();
            if let Some(r) = st.own.take() {
                match parent {
                    Some(_) => st.queue.push_back(r),
                    None => st.received.push(r),
                }
            }
        }
        for (slot, msg) in ctx.inbox() {
            match msg {
                UpMsg::Rec(r) => {
                    st.routes.push((r.frag, slot));
                    match parent {
                        Some(_) => st.queue.push_back(r),
                        None => st.received.push(r),
                    }
                }
                UpMsg::Done => st.waiting -= 1,
            }
        }
        let Some(p) = parent else { return Step::Halt };
        if let Some(r) = st.queue.pop_front() {
            ctx.send(p, UpMsg::Rec(r));
        } else if st.waiting == 0 && !st.done_sent {
            ctx.send(p, UpMsg::Done);
            st.done_sent = true;
        }
        if st.queue.is_empty() && (st.done_sent || st.waiting > 0) {
            Step::Halt
        } else {
            Step::Continue
        }
    }
}

/// Sends each present record to vertex 0. Returns the records in arrival
/// order and the routes back to their senders. Completion is detected with
/// a `Done` marker per BFS edge, so vertex 0 also learns how many records
/// exist.
pub fn upcast(
    sim: &mut Simulator<'_>,
    bfs: &BfsTree,
    records: &[Option<CastRecord>],
) -> Result<(Vec<CastRecord>, Routes, RoundStats), SimError> {
    let mut states: Vec<UpNode> = records.iter().map(|&own| UpNode { own, ..Default::default() }).collect();
    let stats = sim.run(&Up { bfs }, &mut states)?;
    let received = std::mem::take(&mut states[0].received);
    let table = states
        .into_iter()
        .map(|mut st| {
            st.routes.sort_unstable();
            st.routes
        })
        .collect();
    Ok((received, Routes { table }, stats))
}

#[derive(Clone, Copy)]
struct DownMsg(CastRecord);

impl Message for DownMsg {
    const KINDS: u32 = 1;
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.id(self.0.frag).id(self.0.a).id(self.0.b);
    }
}

#[derive(Clone, Default)]
struct DownNode {
    queue: VecDeque<(u32, CastRecord)>,
    got: Option<CastRecord>,
}

struct Down<'a> {
    routes: &'a Routes,
}

impl DownNode {
    fn accept(&mut self, v: VertexId, r: CastRecord, routes: &Routes) {
        if r.frag == v {
            self.got = Some(r);
        } else {
            let hop = routes.next_hop(v, r.frag).expect("route to every fragment root");
            self.queue.push_back((hop, r));
        }
    }

    fn flush(&mut self, ctx: &mut Context<'_, DownMsg>) -> Step {
        let mut i = 0;
        while i < self.queue.len() {
            let (slot, r) = self.queue[i];
            if ctx.can_send(slot) {
                ctx.send(slot, DownMsg(r));
                self.queue.remove(i);
            } else {
                i += 1;
            }
        }
        if self.queue.is_empty() {
            Step::Halt
        } else {
            Step::Continue
        }
    }
}

impl Protocol for Down<'_> {
    type State = DownNode;
    type Msg = DownMsg;

    fn step(&self, ctx: &mut Context<'_, DownMsg>, st: &mut DownNode) -> Step {
        let v = ctx.node();
        for (_, DownMsg(r)) in ctx.inbox() {
            st.accept(v, r, self.routes);
        }
        st.flush(ctx)
    }
}

/// Delivers each record from vertex 0 to the vertex `record.frag`, one record
/// per channel per round.
pub fn downcast(
    sim: &mut Simulator<'_>,
    routes: &Routes,
    records: &[CastRecord],
) -> Result<(Vec<Option<CastRecord>>, RoundStats), SimError> {
    let n = sim.topology().n();
    let mut states = vec![DownNode::default(); n];
    for &r in records {
        states[0].accept(0, r, routes);
    }
    let stats = sim.run(&Down { routes }, &mut states)?;
    Ok((states.into_iter().map(|s| s.got).collect(), stats))
}

/// Value of a convergecast: the lexicographically smallest present `(a, b)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AggValue {
    pub present: bool,
    pub a: u64,
    pub b: u64,
}

impl AggValue {
    pub const NONE: AggValue = AggValue { present: false, a: 0, b: 0 };

    pub fn flag(present: bool) -> Self {
        AggValue { present, a: 0, b: 0 }
    }

    pub fn some(a: u64, b: u64) -> Self {
        AggValue { present: true, a, b }
    }

    fn combine(self, other: AggValue) -> AggValue {
        match (self.present, other.present) {
            (_, false) => self,
            (false, true) => other,
            (true, true) => {
                if (other.a, other.b) < (self.a, self.b) {
                    other
                } else {
                    self
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
struct AggMsg {
    value: AggValue,
    max_a: u64,
    max_b: u64,
}

impl Message for AggMsg {
    const KINDS: u32 = 1;
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.flag(self.value.present).bounded(self.value.a, self.max_a).bounded(self.value.b, self.max_b);
    }
}

#[derive(Clone, Default)]
struct AggNode {
    acc: AggValue,
    waiting: usize,
    result: Option<AggValue>,
}

struct Agg<'a> {
    bfs: &'a BfsTree,
    max_a: u64,
    max_b: u64,
}

impl Agg<'_> {
    fn msg(&self, value: AggValue) -> AggMsg {
        AggMsg { value, max_a: self.max_a, max_b: self.max_b }
    }

    fn broadcast(&self, ctx: &mut Context<'_, AggMsg>, value: AggValue) {
        for &c in self.bfs.children(ctx.node()) {
            ctx.send(c, self.msg(value));
        }
    }
}

impl Protocol for Agg<'_> {
    type State = AggNode;
    type Msg = AggMsg;

    fn step(&self, ctx: &mut Context<'_, AggMsg>, st: &mut AggNode) -> Step {
        let v = ctx.node();
        let parent = self.bfs.parent_slot(v);
        let mut complete = false;
        if ctx.round() == 1 {
            st.waiting = self.bfs.children(v).len();
            complete = st.waiting == 0;
        }
        for (slot, m) in ctx.inbox() {
            if Some(slot) == parent {
                st.result = Some(m.value);
                self.broadcast(ctx, m.value);
            } else {
                st.acc = st.acc.combine(m.value);
                st.waiting -= 1;
                complete = st.waiting == 0;
            }
        }
        if complete {
            match parent {
                Some(p) => ctx.send(p, self.msg(st.acc)),
                None => {
                    st.result = Some(st.acc);
                    self.broadcast(ctx, st.acc);
                }
            }
        }
        Step::Halt
    }
}

/// Convergecast of `values` to vertex 0 followed by a broadcast of the result,
/// so that every vertex learns it. Fields are sized by `max_a` and `max_b`.
pub fn aggregate(
    sim: &mut Simulator<'_>,
    bfs: &BfsTree,
    values: &[AggValue],
    max_a: u64,
    max_b: u64,
) -> Result<(AggValue, RoundStats), SimError> {
    let mut states: Vec<AggNode> = values.iter().map(|&acc| AggNode { acc, ..Default::default() }).collect();
    let stats = sim.run(&Agg { bfs, max_a, max_b }, &mut states)?;
    let result = states[0].result.expect("root finishes");
    debug_assert!(states.iter().all(|s| s.result == Some(result)));
    Ok((result, stats))
}
