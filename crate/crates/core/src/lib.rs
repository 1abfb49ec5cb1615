//! Coherence between class-dependency networks and their package structure.
//!
//! Classes are nodes, dependencies are directed edges and packages are
//! modules. The Q-metric ([`modularity::modularity_q`]) scores how strongly
//! edges stay inside modules compared with a random allocation; tracking it
//! over snapshots ([`evolution`]) shows whether a project's modularity is
//! improving or eroding.
//!
//! Data-parallel loops (snapshot scoring, source lexing, seed sweeps) run on
//! rayon when the default `parallel` feature is enabled; see [`exec`].

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod export;
pub mod extract;
pub mod formats;
pub mod graph;
pub mod modularity;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{
    build_graph, largest_connected_component, partition_from_names, symmetrize, DependencyGraph,
    ModulePartition, NodeId,
};
pub use modularity::{
    mixing_matrix, modularity_q, q_at_depth, GraphMode, MixingMatrix, ModularityScore,
};
