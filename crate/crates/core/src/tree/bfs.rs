use crate::graph::VertexId;
use crate::sim::{Context, Encoder, Message, Protocol, RoundStats, SimError, Simulator, Step};

use super::NO_SLOT;

/// BFS tree of the communication graph rooted at vertex 0, as seen by each
/// node: the slot of its parent and the slots of its children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BfsTree {
    parent_slot: Vec<u32>,
    children: Vec<Vec<u32>>,
    dist: Vec<u32>,
}

impl BfsTree {
    pub fn root(&self) -> VertexId {
        0
    }

    pub fn parent_slot(&self, v: VertexId) -> Option<u32> {
        let s = self.parent_slot[v as usize];
        (s != NO_SLOT).then_some(s)
    }

    pub fn children(&self, v: VertexId) -> &[u32] {
        &self.children[v as usize]
    }

    pub fn dist(&self, v: VertexId) -> u32 {
        self.dist[v as usize]
    }

    pub fn depth(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Copy)]
enum BfsMsg {
    Explore,
    Accept,
}

impl Message for BfsMsg {
    const KINDS: u32 = 2;
    fn encode(&self, _: &mut Encoder<'_>) {}
}

#[derive(Clone, Default)]
struct BfsNode {
    dist: Option<u32>,
    parent: u32,
    children: Vec<u32>,
}

struct Bfs;

impl Protocol for Bfs {
    type State = BfsNode;
    type Msg = BfsMsg;

    fn step(&self, ctx: &mut Context<'_, BfsMsg>, st: &mut BfsNode) -> Step {
        if ctx.round() == 1 && ctx.node() == 0 {
            st.dist = Some(0);
            st.parent = NO_SLOT;
            for s in 0..ctx.degree() as u32 {
                ctx.send(s, BfsMsg::Explore);
            }
            return Step::Halt;
        }
        let mut explorers = Vec::new();
        for (slot, msg) in ctx.inbox() {
            match msg {
                BfsMsg::Explore => explorers.push(slot),
                BfsMsg::Accept => st.children.push(slot),
            }
        }
        if st.dist.is_none() && !explorers.is_empty() {
            st.dist = Some(ctx.round() as u32 - 1);
            st.parent = explorers[0];
            ctx.send(st.parent, BfsMsg::Accept);
            for s in 0..ctx.degree() as u32 {
                if !explorers.contains(&s) {
                    ctx.send(s, BfsMsg::Explore);
                }
            }
        }
        Step::Halt
    }
}

/// Builds the BFS tree by flooding from vertex 0; every explored node answers
/// its chosen parent so that parents learn their children.
pub fn build_bfs(sim: &mut Simulator<'_>) -> Result<(BfsTree, RoundStats), SimError> {
    let n = sim.topology().n();
    let mut states = vec![BfsNode::default(); n];
    let stats = sim.run(&Bfs, &mut states)?;
    let mut tree =
        BfsTree { parent_slot: Vec::with_capacity(n), children: Vec::with_capacity(n), dist: Vec::with_capacity(n) };
    for st in states {
        tree.dist.push(st.dist.expect("connected graph"));
        tree.parent_slot.push(st.parent);
        tree.children.push(st.children);
    }
    Ok((tree, stats))
}
