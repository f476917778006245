use crate::graph::VertexId;
use crate::sim::{Context, Encoder, Message, Protocol, RoundStats, Simulator, Step};

use super::{RootedSpanningTree, TreeError, TreeSlots};

/// Partition of a rooted tree into connected fragments. A fragment is named
/// by its root: the tree root, or the fragment vertex whose parent lies
/// outside the fragment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentDecomposition {
    fragment_of: Vec<VertexId>,
    roots: Vec<VertexId>,
    size: Vec<u32>,
    parent_fragment: Vec<Option<VertexId>>,
    threshold: u32,
}

impl FragmentDecomposition {
    pub fn fragment_of(&self, v: VertexId) -> VertexId {
        self.fragment_of[v as usize]
    }

    pub fn fragments(&self) -> &[VertexId] {
        &self.fragment_of
    }

    /// Fragment roots in ascending order.
    pub fn roots(&self) -> &[VertexId] {
        &self.roots
    }

    pub fn count(&self) -> usize {
        self.roots.len()
    }

    pub fn is_root(&self, v: VertexId) -> bool {
        self.fragment_of[v as usize] == v
    }

    /// Vertex count of the fragment rooted at `root`.
    pub fn size(&self, root: VertexId) -> u32 {
        self.size[root as usize]
    }

    /// Fragment containing the tree parent of `root`, as learned by `root`.
    pub fn parent_fragment(&self, root: VertexId) -> Option<VertexId> {
        self.parent_fragment[root as usize]
    }

    /// The closing threshold `⌈√n⌉`.
    pub fn threshold(&self) -> u32 {
        self.threshold
    }
}

/// `⌈√n⌉`.
pub(crate) fn ceil_sqrt(n: usize) -> u32 {
    let mut s = (n as f64).sqrt() as u64;
    while s * s < n as u64 {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= n as u64 {
        s -= 1;
    }
    s.max(1) as u32
}

#[derive(Clone, Copy)]
enum DecMsg {
    /// Open vertices below the sender, `0` if the sender closed a fragment.
    Pending(u32, u32),
    Frag(VertexId),
}

impl Message for DecMsg {
    const KINDS: u32 = 2;
    fn encode(&self, enc: &mut Encoder<'_>) {
        match *self {
            DecMsg::Pending(v, max) => {
                enc.bounded(u64::from(v), u64::from(max));
            }
            DecMsg::Frag(id) => {
                enc.id(id);
            }
        }
    }
}

#[derive(Clone, Default)]
struct DecNode {
    waiting: usize,
    pending: u32,
    reported: bool,
    closed: bool,
    frag: Option<VertexId>,
    parent_frag: Option<VertexId>,
}

struct Decompose<'a> {
    slots: &'a TreeSlots,
    threshold: u32,
}

impl Protocol for Decompose<'_> {
    type State = DecNode;
    type Msg = DecMsg;

    fn step(&self, ctx: &mut Context<'_, DecMsg>, st: &mut DecNode) -> Step {
        let v = ctx.node();
        let parent = self.slots.parent(v);
        let children = self.slots.children(v);
        if ctx.round() == 1 {
            st.waiting = children.len();
            st.pending = 1;
        }
        for (_, msg) in ctx.inbox() {
            match msg {
                DecMsg::Pending(x, _) => {
                    st.pending += x;
                    st.waiting -= 1;
                }
                DecMsg::Frag(id) => {
                    if st.closed {
                        st.parent_frag = Some(id);
                    } else {
                        st.frag = Some(id);
                        for &c in children {
                            ctx.send(c, DecMsg::Frag(id));
                        }
                    }
                }
            }
        }
        if st.waiting == 0 && !st.reported {
            st.reported = true;
            let max = self.threshold - 1;
            if st.pending >= self.threshold || parent.is_none() {
                st.closed = true;
                st.frag = Some(v);
                if let Some(p) = parent {
                    ctx.send(p, DecMsg::Pending(0, max));
                }
                for &c in children {
                    ctx.send(c, DecMsg::Frag(v));
                }
            } else if let Some(p) = parent {
                ctx.send(p, DecMsg::Pending(st.pending, max));
            }
        }
        Step::Halt
    }
}

/// Bottom-up fragment growth. Each vertex sums the open vertices reported by
/// its children; it closes a fragment when the sum reaches `⌈√n⌉` or when it
/// is the tree root, then names the fragment by broadcasting its id down.
/// Every open subtree holds fewer than `⌈√n⌉` vertices, so fragment diameter
/// stays below `2⌈√n⌉`; every fragment but the root's holds at least `⌈√n⌉`
/// vertices, so there are at most `√n + 1` of them.
pub fn decompose(
    sim: &mut Simulator<'_>,
    tree: &RootedSpanningTree,
) -> Result<(FragmentDecomposition, RoundStats), TreeError> {
    let slots = TreeSlots::new(sim.topology(), tree)?;
    decompose_with(sim, tree, &slots)
}

pub(crate) fn decompose_with(
    sim: &mut Simulator<'_>,
    tree: &RootedSpanningTree,
    slots: &TreeSlots,
) -> Result<(FragmentDecomposition, RoundStats), TreeError> {
    let n = tree.n();
    let threshold = ceil_sqrt(n);
    let mut states = vec![DecNode::default(); n];
    let stats = sim.run(&Decompose { slots, threshold }, &mut states)?;
    let mut fragment_of = Vec::with_capacity(n);
    let mut size = vec![0u32; n];
    let mut parent_fragment = vec![None; n];
    let mut roots = Vec::new();
    for (v, st) in states.iter().enumerate() {
        fragment_of.push(st.frag.expect("every vertex learns its fragment"));
        if st.closed {
            roots.push(v as VertexId);
            size[v] = st.pending;
            parent_fragment[v] = st.parent_frag;
        }
    }
    let decomposition = FragmentDecomposition { fragment_of, roots, size, parent_fragment, threshold };
    Ok((decomposition, stats))
}
