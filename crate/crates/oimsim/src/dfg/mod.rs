//! Dataflow graph construction, optimization passes, levelization and slot
//! assignment.

mod graph;
mod levelize;
pub mod opcode;
mod passes;
mod slots;

pub use graph::{
    build_graph, DataflowGraph, GraphRegister, Node, Source, SourceKind, ValueRef,
};
pub use levelize::{levelize, LayeredGraph};
pub use opcode::{Opcode, ALL_OPCODES, NUM_OPCODES};
pub use passes::{
    constant_propagate, copy_propagate, dead_code_eliminate, fuse_mux_chains, run_passes,
};
pub use slots::{assign_slots, naive_identity_count, RegSlots, SlotAssignment};

pub type NodeId = usize;
pub type SourceId = usize;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DfgError {
    #[error("combinational loop through: {}", cycle.join(" -> "))]
    CombinationalLoop { cycle: Vec<String> },
}
