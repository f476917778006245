//! Round-synchronous CONGEST engine.
//!
//! Every round, each scheduled node reads the messages delivered to it, updates
//! its state and may send at most one message per neighbor. Parallel edges
//! between two vertices collapse into one logical channel, so a pair of
//! vertices exchanges at most one message per direction per round no matter
//! how heavy the edge is. Every message is sized by its canonical encoding
//! (see [`message`]) and checked against the budget `B` when it is sent.
//!
//! Scheduling is event driven: a node that returns [`Step::Halt`] is not
//! stepped again until a message reaches it. Round 1 steps every node. A run
//! ends once no node asked to continue and nothing is in flight. Local
//! computation is free; only rounds and bits are metered.

pub mod message;
mod stats;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{VertexId, WeightedMultigraph};
use crate::rng::Seed;
pub use message::{message_size, EncodeError, Encoder, Message, Widths};
pub use stats::RoundStats;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("round {round}: node {node} sent {bits} bits to {to}, budget is {budget}")]
    BudgetViolation { node: VertexId, round: u64, to: VertexId, bits: u32, budget: u32 },
    #[error("round {round}: node {node} sent twice to {to}")]
    DuplicateSend { node: VertexId, round: u64, to: VertexId },
    #[error("node {node} has no channel {slot}")]
    InvalidSlot { node: VertexId, slot: u32 },
    #[error("round {round}: node {node} produced an unencodable message: {source}")]
    Unencodable { node: VertexId, round: u64, source: EncodeError },
    #[error("round limit {limit} exceeded after {} transmitting rounds", stats.rounds)]
    RoundLimit { limit: u64, stats: Box<RoundStats> },
    #[error("invalid network configuration: {0}")]
    Config(String),
}

/// Logical channels of a graph in compressed adjacency form.
///
/// Channel slots of a node are ordered by ascending neighbor id.
#[derive(Clone, Debug)]
pub struct Topology {
    n: usize,
    offsets: Vec<u32>,
    neighbor: Vec<VertexId>,
    reverse: Vec<u32>,
    edge: Vec<u32>,
    max_weight: u64,
}

impl Topology {
    pub fn new(g: &WeightedMultigraph) -> Self {
        let adj = g.adjacency();
        let mut offsets = Vec::with_capacity(g.n() + 1);
        let mut neighbor = Vec::new();
        let mut edge = Vec::new();
        offsets.push(0);
        for list in &adj {
            for &(v, e) in list {
                neighbor.push(v);
                edge.push(e as u32);
            }
            offsets.push(neighbor.len() as u32);
        }
        let mut reverse = vec![0u32; neighbor.len()];
        for u in 0..g.n() {
            for ch in offsets[u] as usize..offsets[u + 1] as usize {
                let v = neighbor[ch] as usize;
                let list = &neighbor[offsets[v] as usize..offsets[v + 1] as usize];
                reverse[ch] = list.binary_search(&(u as VertexId)).expect("symmetric adjacency") as u32;
            }
        }
        Topology { n: g.n(), offsets, neighbor, reverse, edge, max_weight: g.max_weight() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self, u: VertexId) -> usize {
        (self.offsets[u as usize + 1] - self.offsets[u as usize]) as usize
    }

    pub fn neighbors(&self, u: VertexId) -> &[VertexId] {
        &self.neighbor[self.offsets[u as usize] as usize..self.offsets[u as usize + 1] as usize]
    }

    pub fn neighbor(&self, u: VertexId, slot: u32) -> VertexId {
        self.neighbor[self.channel(u, slot)]
    }

    /// Edge record index (into `WeightedMultigraph::edges`) behind a channel.
    pub fn edge_of(&self, u: VertexId, slot: u32) -> usize {
        self.edge[self.channel(u, slot)] as usize
    }

    /// Edge record index behind a global channel index.
    pub fn edge_at(&self, channel: usize) -> usize {
        self.edge[channel] as usize
    }

    /// Slot of `v` in `u`'s channel list.
    pub fn slot_of(&self, u: VertexId, v: VertexId) -> Option<u32> {
        self.neighbors(u).binary_search(&v).ok().map(|s| s as u32)
    }

    pub fn channel(&self, u: VertexId, slot: u32) -> usize {
        self.offsets[u as usize] as usize + slot as usize
    }

    pub fn channels(&self) -> usize {
        self.neighbor.len()
    }

    pub fn max_weight(&self) -> u64 {
        self.max_weight
    }
}

/// Model parameters of one network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetworkConfig {
    /// Budget `B` in bits per channel per direction per round.
    pub bits_per_message: u32,
    pub round_limit: u64,
    /// Master seed of the per-node randomness streams.
    pub seed: Seed,
}

impl NetworkConfig {
    /// `B = 4⌈log2 n⌉`, round limit 10^6.
    pub fn for_n(n: usize) -> Self {
        NetworkConfig { bits_per_message: 4 * message::id_bits(n), round_limit: 1_000_000, seed: Seed(0) }
    }

    pub fn validate(&self, n: usize) -> Result<(), SimError> {
        let floor = message::id_bits(n) + 2;
        if self.bits_per_message < floor {
            return Err(SimError::Config(format!("B = {} is below ⌈log2 n⌉ + 2 = {floor}", self.bits_per_message)));
        }
        if self.round_limit == 0 {
            return Err(SimError::Config("round limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    /// Step this node again next round even if nothing arrives.
    Continue,
    /// Sleep until a message arrives.
    Halt,
}

/// A distributed algorithm: one step function shared by all nodes.
pub trait Protocol {
    type State;
    type Msg: Message;

    fn step(&self, ctx: &mut Context<'_, Self::Msg>, state: &mut Self::State) -> Step;
}

#[derive(Clone, Copy)]
struct Envelope<M> {
    dest: VertexId,
    slot: u32,
    msg: M,
}

/// A node's view of the network during one step.
pub struct Context<'a, M: Message> {
    node: VertexId,
    round: u64,
    stamp: u64,
    topo: &'a Topology,
    widths: &'a Widths,
    budget: u32,
    inbox: &'a [Envelope<M>],
    out: &'a mut Vec<Envelope<M>>,
    sent_stamp: &'a mut [u64],
    max_bits: &'a mut u32,
    error: &'a mut Option<SimError>,
    rng: &'a mut Option<ChaCha8Rng>,
    seed: Seed,
}

impl<'a, M: Message> Context<'a, M> {
    pub fn node(&self) -> VertexId {
        self.node
    }

    /// Current round, starting at 1.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn n(&self) -> usize {
        self.topo.n
    }

    pub fn degree(&self) -> usize {
        self.topo.degree(self.node)
    }

    pub fn neighbor(&self, slot: u32) -> VertexId {
        self.topo.neighbor(self.node, slot)
    }

    pub fn neighbors(&self) -> &'a [VertexId] {
        self.topo.neighbors(self.node)
    }

    /// Network-wide index of this node's channel `slot`.
    pub fn channel(&self, slot: u32) -> usize {
        self.topo.channel(self.node, slot)
    }

    /// Messages sent to this node last round, as `(slot, message)`.
    pub fn inbox(&self) -> impl Iterator<Item = (u32, M)> + 'a {
        self.inbox.iter().map(|e| (e.slot, e.msg))
    }

    pub fn has_mail(&self) -> bool {
        !self.inbox.is_empty()
    }

    /// Whether the channel to `slot` is still unused this round.
    pub fn can_send(&self, slot: u32) -> bool {
        (slot as usize) < self.degree() && self.sent_stamp[self.topo.channel(self.node, slot)] != self.stamp
    }

    /// Queues `msg` on channel `slot`. Budget and channel violations abort the run.
    pub fn send(&mut self, slot: u32, msg: M) {
        if self.error.is_some() {
            return;
        }
        if slot as usize >= self.degree() {
            *self.error = Some(SimError::InvalidSlot { node: self.node, slot });
            return;
        }
        let ch = self.topo.channel(self.node, slot);
        let to = self.topo.neighbor[ch];
        if self.sent_stamp[ch] == self.stamp {
            *self.error = Some(SimError::DuplicateSend { node: self.node, round: self.round, to });
            return;
        }
        let bits = match message_size(Some(&msg), self.widths) {
            Ok(b) => b,
            Err(source) => {
                *self.error = Some(SimError::Unencodable { node: self.node, round: self.round, source });
                return;
            }
        };
        if bits > self.budget {
            *self.error =
                Some(SimError::BudgetViolation { node: self.node, round: self.round, to, bits, budget: self.budget });
            return;
        }
        self.sent_stamp[ch] = self.stamp;
        *self.max_bits = (*self.max_bits).max(bits);
        self.out.push(Envelope { dest: to, slot: self.topo.reverse[ch], msg });
    }

    /// This node's private randomness stream, derived from the network seed
    /// and the node id.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        let (seed, node) = (self.seed, self.node);
        self.rng.get_or_insert_with(|| seed.stream("node").index(u64::from(node)).rng())
    }
}

/// Runs protocols on one network, reusing scratch space between runs.
pub struct Simulator<'t> {
    topo: &'t Topology,
    config: NetworkConfig,
    widths: Widths,
    sent_stamp: Vec<u64>,
    stamp_base: u64,
    rngs: Vec<Option<ChaCha8Rng>>,
    scheduled: Vec<VertexId>,
    next_scheduled: Vec<VertexId>,
}

impl<'t> Simulator<'t> {
    pub fn new(topo: &'t Topology, config: NetworkConfig) -> Result<Self, SimError> {
        config.validate(topo.n())?;
        Ok(Simulator {
            topo,
            config,
            widths: Widths::new(topo.n(), topo.max_weight()),
            sent_stamp: vec![0; topo.channels()],
            stamp_base: 0,
            rngs: Vec::new(),
            scheduled: Vec::new(),
            next_scheduled: Vec::new(),
        })
    }

    pub fn topology(&self) -> &'t Topology {
        self.topo
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn widths(&self) -> &Widths {
        &self.widths
    }

    /// Executes `program` from `states` until quiescence.
    pub fn run<P: Protocol>(&mut self, program: &P, states: &mut [P::State]) -> Result<RoundStats, SimError> {
        let n = self.topo.n();
        assert_eq!(states.len(), n, "one state per node");
        let mut current: Vec<Envelope<P::Msg>> = Vec::new();
        let mut next: Vec<Envelope<P::Msg>> = Vec::new();
        self.scheduled.clear();
        self.scheduled.extend(0..n as VertexId);
        self.next_scheduled.clear();
        if !self.rngs.is_empty() {
            self.rngs.iter_mut().for_each(|r| *r = None);
        } else {
            self.rngs.resize_with(n, || None);
        }

        let mut stats = RoundStats::default();
        let mut max_bits = 0u32;
        let mut error = None;
        let mut round = 1u64;
        loop {
            if round > self.config.round_limit {
                self.stamp_base += round;
                stats.max_bits_per_edge_round = max_bits;
                return Err(SimError::RoundLimit { limit: self.config.round_limit, stats: Box::new(stats) });
            }
            let stamp = self.stamp_base + round;
            let (mut ci, mut si) = (0usize, 0usize);
            while ci < current.len() || si < self.scheduled.len() {
                let node = match (current.get(ci), self.scheduled.get(si)) {
                    (Some(e), Some(&s)) => e.dest.min(s),
                    (Some(e), None) => e.dest,
                    (None, Some(&s)) => s,
                    (None, None) => unreachable!(),
                };
                if self.scheduled.get(si) == Some(&node) {
                    si += 1;
                }
                let start = ci;
                while ci < current.len() && current[ci].dest == node {
                    ci += 1;
                }
                let mut ctx = Context {
                    node,
                    round,
                    stamp,
                    topo: self.topo,
                    widths: &self.widths,
                    budget: self.config.bits_per_message,
                    inbox: &current[start..ci],
                    out: &mut next,
                    sent_stamp: &mut self.sent_stamp,
                    max_bits: &mut max_bits,
                    error: &mut error,
                    rng: &mut self.rngs[node as usize],
                    seed: self.config.seed,
                };
                let step = program.step(&mut ctx, &mut states[node as usize]);
                if let Some(err) = error.take() {
                    self.stamp_base += round;
                    return Err(err);
                }
                if step == Step::Continue {
                    self.next_scheduled.push(node);
                }
            }
            if !next.is_empty() {
                stats.rounds = round;
                stats.total_messages += next.len() as u64;
            }
            if next.is_empty() && self.next_scheduled.is_empty() {
                break;
            }
            next.sort_unstable_by_key(|e| (u64::from(e.dest) << 32) | u64::from(e.slot));
            std::mem::swap(&mut current, &mut next);
            next.clear();
            std::mem::swap(&mut self.scheduled, &mut self.next_scheduled);
            self.next_scheduled.clear();
            round += 1;
        }
        self.stamp_base += round;
        stats.max_bits_per_edge_round = max_bits;
        Ok(stats)
    }
}
