//! Greedy generation of binary de Bruijn sequences with feedback shift
//! registers.
//!
//! The core generator is the Generalized Prefer-Opposite (GPO) loop: shift
//! the register, preferring the complement of the feedback value unless the
//! resulting state has appeared before. For a standard feedback function
//! (one that ignores its first variable) whose state graph has a single
//! cycle, the run from any cycle state emits a de Bruijn sequence.
//!
//! When the state graph splits into several components, the Graph Joining
//! Prefer-Opposite (GJPO) variant repairs the run with forced transitions at
//! preference companion pairs chosen along a rooted spanning tree of the
//! preference adjacency graph; see [`join`].
//!
//! The crate also reverse-engineers a generating input pair for any periodic
//! sequence of nonlinear complexity at least two ([`gpo::reverse_engineer`])
//! and ships the function families used throughout the test corpus
//! ([`families`]).

pub mod error;
pub mod families;
pub mod function;
pub mod gpo;
pub mod graph;
pub mod join;
pub mod sequence;
pub mod state;

pub use error::{Error, Result};
pub use function::{Anf, FeedbackFunction};
pub use gpo::{
    gpo_generate, gpo_generate_trace, gpo_generate_unchecked, gpo_guarantees_de_bruijn,
    initial_state_candidates, reverse_engineer, reverse_engineer_with, GpoOutcome,
};
pub use graph::{Component, StateGraph};
pub use join::{
    count_spanning_trees_kirchhoff, enumerate_outputs, enumerate_outputs_jobs,
    enumerate_outputs_with_graph, gjpo_generate, rooted_spanning_trees, EnumerationReport,
    Multigraph, Pag, Pcp, RootedSpanningTree,
};
pub use sequence::PeriodicSequence;
pub use state::RegisterState;

/// Default cap on the register order; state graphs store 2^n entries.
pub const DEFAULT_MAX_ORDER: usize = 20;
