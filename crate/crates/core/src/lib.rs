//! CONGEST-model simulation of a distributed (1+ε)-approximate minimum cut.
//!
//! The crate is layered:
//!
//! * [`graph`]: weighted multigraphs, generators, sampling, file format.
//! * [`sim`]: the round-synchronous engine with per-channel bit budgets.
//! * [`tree`]: fragment decomposition, preorder, low/high labels, bridges.
//! * [`mst`]: distributed MST and greedy tree packing.
//! * [`driver`]: the tree-cut tester and the outer sampling schedule.
//! * [`oracle`]: centralized references used by the tests.

pub mod driver;
pub mod graph;
pub mod mst;
pub mod oracle;
pub mod rng;
pub mod sim;
pub mod tree;

pub use graph::{cut_weight, Edge, GraphError, VertexId, VertexSide, WeightedMultigraph};
pub use rng::Seed;
pub use sim::{NetworkConfig, RoundStats, SimError};
