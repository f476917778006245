//! Preorder numbers and subtree sizes through the contracted tree.

use crate::graph::VertexId;
use crate::sim::{Context, Encoder, Message, Protocol, RoundStats, Simulator, Step};

use super::cast::{downcast, upcast, CastRecord, Routes};
use super::decompose::decompose_with;
use super::{BfsTree, FragmentDecomposition, RootedSpanningTree, TreeError, TreeSlots, NO_SLOT};

/// Role of a channel with respect to `T`, as known by its near end.
pub(crate) const ROLE_NONE: u8 = 0;
pub(crate) const ROLE_PARENT: u8 = 1;
pub(crate) const ROLE_CHILD: u8 = 2;
/// Tree child that roots its own fragment.
pub(crate) const ROLE_LINK: u8 = 3;

/// Vertex 0's picture of the contracted tree.
#[derive(Clone, Debug)]
pub(crate) struct Contracted {
    /// Fragment roots; index `i` names the fragment below.
    pub(crate) frags: Vec<VertexId>,
    pub(crate) parent: Vec<u32>,
    /// Fragment indices with every child before its parent.
    pub(crate) bottom_up: Vec<u32>,
    index: Vec<u32>,
}

impl Contracted {
    fn from_records(n: usize, records: &[CastRecord]) -> Self {
        let mut frags: Vec<VertexId> = records.iter().map(|r| r.frag).collect();
        frags.sort_unstable();
        let mut index = vec![NO_SLOT; n];
        for (i, &f) in frags.iter().enumerate() {
            index[f as usize] = i as u32;
        }
        let mut parent = vec![NO_SLOT; frags.len()];
        let mut kids = vec![Vec::new(); frags.len()];
        let mut top = NO_SLOT;
        for r in records {
            let i = index[r.frag as usize];
            if r.a == r.frag {
                top = i;
            } else {
                parent[i as usize] = index[r.a as usize];
                kids[index[r.a as usize] as usize].push(i);
            }
        }
        assert_ne!(top, NO_SLOT, "contracted tree has a root fragment");
        let mut order = vec![top];
        let mut head = 0;
        while head < order.len() {
            let i = order[head] as usize;
            order.extend(kids[i].iter().copied());
            head += 1;
        }
        assert_eq!(order.len(), frags.len(), "contracted tree is connected");
        order.reverse();
        Contracted { frags, parent, bottom_up: order, index }
    }

    pub(crate) fn index(&self, frag: VertexId) -> usize {
        self.index[frag as usize] as usize
    }

    pub(crate) fn len(&self) -> usize {
        self.frags.len()
    }
}

/// Everything a tree needs before per-sample bridge detection: fragments,
/// routes, `pre` and `size` at every vertex, and every neighbor's `pre`.
#[derive(Clone, Debug)]
pub struct PreparedTree {
    pub(crate) tree: RootedSpanningTree,
    pub(crate) slots: TreeSlots,
    pub(crate) decomposition: FragmentDecomposition,
    pub(crate) routes: Routes,
    pub(crate) contracted: Contracted,
    pub(crate) pre: Vec<u32>,
    pub(crate) size: Vec<u32>,
    /// Per channel: the role of the far end in `T`.
    pub(crate) role: Vec<u8>,
    /// Per channel: `pre` of the far end.
    pub(crate) neighbor_pre: Vec<u32>,
    /// Each vertex's channels by ascending `pre` of the far end.
    pub(crate) by_pre: Vec<u32>,
    /// Children inside the vertex's own fragment.
    pub(crate) inner_children: Vec<u32>,
    /// Corrections to wait for before passing one up.
    pub(crate) fix_wait: Vec<u32>,
    /// Whether the vertex passes a correction to its parent.
    pub(crate) sends_fix: Vec<bool>,
    stats: RoundStats,
}

impl PreparedTree {
    pub fn tree(&self) -> &RootedSpanningTree {
        &self.tree
    }

    pub fn decomposition(&self) -> &FragmentDecomposition {
        &self.decomposition
    }

    pub fn pre(&self) -> &[u32] {
        &self.pre
    }

    pub fn size(&self) -> &[u32] {
        &self.size
    }

    /// Rounds spent preparing, per phase.
    pub fn stats(&self) -> &RoundStats {
        &self.stats
    }

    /// Whether `x` lies in the subtree of `v`, decided from labels alone.
    pub fn in_subtree(&self, v: VertexId, x: VertexId) -> bool {
        let (p, s) = (self.pre[v as usize], self.size[v as usize]);
        let q = self.pre[x as usize];
        p <= q && q < p + s
    }
}

#[derive(Clone, Copy)]
struct Value(u32);

impl Message for Value {
    const KINDS: u32 = 1;
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.id(self.0);
    }
}

#[derive(Clone, Default)]
struct PreNode {
    frag_root: bool,
    /// Subtree size; known up front at fragment roots.
    size: u32,
    waiting: usize,
    reported: bool,
    /// Children that will send a correction during low/high aggregation.
    fix_wait: u32,
    child_size: Vec<u32>,
    rel: u32,
    rel_in_parent: Option<u32>,
    pre: Option<u32>,
    neighbor_pre: Vec<u32>,
}

#[derive(Clone, Copy)]
struct SizeMsg {
    size_minus_one: u32,
    /// The sender roots a fragment or has a fragment child somewhere below
    /// it inside its own fragment: it will send a correction later.
    fixes: bool,
}

impl Message for SizeMsg {
    const KINDS: u32 = 1;
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.id(self.size_minus_one).flag(self.fixes);
    }
}

/// Children report subtree sizes; fragment roots start at once with the
/// size sent down by vertex 0.
struct Sizes<'a> {
    slots: &'a TreeSlots,
}

impl Protocol for Sizes<'_> {
    type State = PreNode;
    type Msg = SizeMsg;

    fn step(&self, ctx: &mut Context<'_, SizeMsg>, st: &mut PreNode) -> Step {
        let v = ctx.node();
        let children = self.slots.children(v);
        if ctx.round() == 1 {
            st.waiting = children.len();
            st.child_size = vec![0; children.len()];
            if !st.frag_root {
                st.size = 1;
            }
        }
        for (slot, m) in ctx.inbox() {
            let j = children.binary_search(&slot).expect("sizes come from children");
            st.child_size[j] = m.size_minus_one + 1;
            if !st.frag_root {
                st.size += m.size_minus_one + 1;
            }
            st.fix_wait += u32::from(m.fixes);
            st.waiting -= 1;
        }
        if !st.reported && (st.frag_root || st.waiting == 0) {
            st.reported = true;
            if let Some(p) = self.slots.parent(v) {
                let fixes = st.frag_root || st.fix_wait > 0;
                ctx.send(p, SizeMsg { size_minus_one: st.size - 1, fixes });
            }
        }
        Step::Halt
    }
}

/// Preorder relative to the fragment root, pushed down from fragment roots.
/// A child that roots another fragment keeps the number as its offset inside
/// the parent fragment.
struct Relative<'a> {
    slots: &'a TreeSlots,
}

impl Relative<'_> {
    fn push(&self, ctx: &mut Context<'_, Value>, st: &PreNode) {
        let mut next = st.rel + 1;
        for (j, &c) in self.slots.children(ctx.node()).iter().enumerate() {
            ctx.send(c, Value(next));
            next += st.child_size[j];
        }
    }
}

impl Protocol for Relative<'_> {
    type State = PreNode;
    type Msg = Value;

    fn step(&self, ctx: &mut Context<'_, Value>, st: &mut PreNode) -> Step {
        if ctx.round() == 1 && st.frag_root {
            st.rel = 0;
            self.push(ctx, st);
        }
        for (_, Value(x)) in ctx.inbox() {
            if st.frag_root {
                st.rel_in_parent = Some(x);
            } else {
                st.rel = x;
                self.push(ctx, st);
            }
        }
        Step::Halt
    }
}

/// Fragment roots learn their absolute number and pass it down; each vertex
/// adds its relative number.
struct Offsets<'a> {
    slots: &'a TreeSlots,
    role: &'a [u8],
}

impl Offsets<'_> {
    fn push(&self, ctx: &mut Context<'_, Value>, base: u32) {
        for &c in self.slots.children(ctx.node()) {
            if self.role[ctx.channel(c)] == ROLE_CHILD {
                ctx.send(c, Value(base));
            }
        }
    }
}

impl Protocol for Offsets<'_> {
    type State = PreNode;
    type Msg = Value;

    fn step(&self, ctx: &mut Context<'_, Value>, st: &mut PreNode) -> Step {
        if ctx.round() == 1 && st.frag_root {
            let base = st.pre.expect("fragment roots know their number");
            self.push(ctx, base);
        }
        for (_, Value(base)) in ctx.inbox() {
            st.pre = Some(base + st.rel);
            self.push(ctx, base);
        }
        Step::Halt
    }
}

/// Everybody tells every neighbor its number.
struct Exchange;

impl Protocol for Exchange {
    type State = PreNode;
    type Msg = Value;

    fn step(&self, ctx: &mut Context<'_, Value>, st: &mut PreNode) -> Step {
        if ctx.round() == 1 {
            st.neighbor_pre = vec![0; ctx.degree()];
            let pre = st.pre.expect("numbered");
            for s in 0..ctx.degree() as u32 {
                ctx.send(s, Value(pre));
            }
        }
        for (slot, Value(x)) in ctx.inbox() {
            st.neighbor_pre[slot as usize] = x;
        }
        Step::Halt
    }
}

/// Decomposes `tree`, then computes `pre` and `size` at every vertex:
///
/// 1. fragment roots upcast `(fragment, parent fragment, fragment size)`;
/// 2. vertex 0 downcasts the size of each contracted subtree;
/// 3. sizes converge inside fragments, fragment roots feeding their parents;
/// 4. fragments number themselves from 0, telling child fragments their
///    offset inside the parent fragment;
/// 5. those offsets go up, vertex 0 resolves absolute numbers of fragment
///    roots and sends them down;
/// 6. fragments add the offset internally and neighbors exchange numbers.
pub fn prepare_tree(
    sim: &mut Simulator<'_>,
    bfs: &BfsTree,
    tree: &RootedSpanningTree,
) -> Result<PreparedTree, TreeError> {
    let topo = sim.topology();
    let n = topo.n();
    let slots = TreeSlots::new(topo, tree)?;
    let mut stats = RoundStats::default();

    let (dec, s) = decompose_with(sim, tree, &slots)?;
    stats.record("decompose", &s);

    let records: Vec<Option<CastRecord>> = (0..n as VertexId)
        .map(|v| {
            dec.is_root(v).then(|| CastRecord { frag: v, a: dec.parent_fragment(v).unwrap_or(v), b: dec.size(v) - 1 })
        })
        .collect();
    let (received, routes, s) = upcast(sim, bfs, &records)?;
    stats.record("preorder/topology-up", &s);
    assert_eq!(received.len(), dec.count());

    // Vertex 0: sizes of contracted subtrees.
    let contracted = Contracted::from_records(n, &received);
    let mut subtree = vec![0u32; contracted.len()];
    for r in &received {
        subtree[contracted.index(r.frag)] = r.b + 1;
    }
    for &i in &contracted.bottom_up {
        let p = contracted.parent[i as usize];
        if p != NO_SLOT {
            subtree[p as usize] += subtree[i as usize];
        }
    }
    let down: Vec<CastRecord> =
        contracted.frags.iter().enumerate().map(|(i, &f)| CastRecord { frag: f, a: subtree[i] - 1, b: 0 }).collect();
    let (got, s) = downcast(sim, &routes, &down)?;
    stats.record("preorder/sizes-down", &s);

    let mut states: Vec<PreNode> = (0..n as VertexId)
        .map(|v| {
            let frag_root = dec.is_root(v);
            let size = if frag_root { got[v as usize].expect("delivered").a + 1 } else { 0 };
            PreNode { frag_root, size, ..Default::default() }
        })
        .collect();
    let s = sim.run(&Sizes { slots: &slots }, &mut states)?;
    stats.record("preorder/subtree-sizes", &s);
    let s = sim.run(&Relative { slots: &slots }, &mut states)?;
    stats.record("preorder/relative", &s);

    let records: Vec<Option<CastRecord>> = states
        .iter()
        .enumerate()
        .map(|(v, st)| st.rel_in_parent.map(|rel| CastRecord { frag: v as VertexId, a: rel, b: 0 }))
        .collect();
    let (received, _, s) = upcast(sim, bfs, &records)?;
    stats.record("preorder/offsets-up", &s);

    // Vertex 0: absolute numbers of fragment roots, parents first.
    let mut rel_in_parent = vec![0u32; contracted.len()];
    for r in &received {
        rel_in_parent[contracted.index(r.frag)] = r.a;
    }
    let mut root_pre = vec![0u32; contracted.len()];
    for &i in contracted.bottom_up.iter().rev() {
        let p = contracted.parent[i as usize];
        if p != NO_SLOT {
            root_pre[i as usize] = root_pre[p as usize] + rel_in_parent[i as usize];
        }
    }
    let down: Vec<CastRecord> =
        contracted.frags.iter().enumerate().map(|(i, &f)| CastRecord { frag: f, a: root_pre[i], b: 0 }).collect();
    let (got, s) = downcast(sim, &routes, &down)?;
    stats.record("preorder/offsets-down", &s);
    for (v, st) in states.iter_mut().enumerate() {
        if st.frag_root {
            st.pre = Some(got[v].expect("delivered").a);
        }
    }

    let mut role = vec![ROLE_NONE; topo.channels()];
    for v in 0..n as VertexId {
        if let Some(p) = slots.parent(v) {
            role[topo.channel(v, p)] = ROLE_PARENT;
        }
        for &c in slots.children(v) {
            let child = topo.neighbor(v, c);
            role[topo.channel(v, c)] = if dec.is_root(child) { ROLE_LINK } else { ROLE_CHILD };
        }
    }
    let s = sim.run(&Offsets { slots: &slots, role: &role }, &mut states)?;
    stats.record("preorder/offset-broadcast", &s);
    let s = sim.run(&Exchange, &mut states)?;
    stats.record("preorder/exchange", &s);

    let fix_wait: Vec<u32> = states.iter().map(|st| st.fix_wait).collect();
    let mut neighbor_pre = Vec::with_capacity(topo.channels());
    let mut pre = Vec::with_capacity(n);
    let mut size = Vec::with_capacity(n);
    for st in &states {
        pre.push(st.pre.expect("numbered"));
        size.push(st.size);
        neighbor_pre.extend_from_slice(&st.neighbor_pre);
    }
    let mut by_pre: Vec<u32> = (0..topo.channels() as u32).collect();
    for v in 0..n as VertexId {
        let first = topo.channel(v, 0);
        by_pre[first..first + topo.degree(v)].sort_unstable_by_key(|&ch| neighbor_pre[ch as usize]);
    }
    let inner_children = (0..n as VertexId)
        .map(|v| slots.children(v).iter().filter(|&&c| role[topo.channel(v, c)] == ROLE_CHILD).count() as u32)
        .collect();
    let parent_is_frag_root =
        (0..n as VertexId).map(|v| tree.parent(v).is_some_and(|p| dec.fragment_of(v) == p)).collect::<Vec<_>>();
    let sends_fix = (0..n).map(|v| !dec.is_root(v as VertexId) && !parent_is_frag_root[v] && fix_wait[v] > 0).collect();

    Ok(PreparedTree {
        tree: tree.clone(),
        slots,
        decomposition: dec,
        routes,
        contracted,
        pre,
        size,
        role,
        neighbor_pre,
        by_pre,
        inner_children,
        fix_wait,
        sends_fix,
        stats,
    })
}

/// `pre` and `size` of every vertex, computed through the contracted tree.
pub fn compute_preorder(
    sim: &mut Simulator<'_>,
    bfs: &BfsTree,
    tree: &RootedSpanningTree,
) -> Result<(Vec<u32>, Vec<u32>, RoundStats), TreeError> {
    let prep = prepare_tree(sim, bfs, tree)?;
    Ok((prep.pre, prep.size, prep.stats))
}
