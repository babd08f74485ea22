//! Multiphase SFQ technology mapping.

pub mod decompose;
pub mod dff;
pub mod netlist;
pub mod phase;
pub mod pipeline;
pub mod random;
pub mod report;
pub mod solver;
pub mod splitter;
pub mod verify;

pub use decompose::{classify, decompose, GateCategory, MappingConfig, ObjectiveMode, OrStyle, SfqNetwork, SpacingMode};
pub use netlist::{GateKind, Network, NodeId};
pub use phase::{assign_stages, StageAssignment};

/// Constraint model with 64-bit coefficients.
pub type Model = solver::ConstraintModel<i64>;
/// Solver result with 64-bit values.
pub type ModelSolution = solver::Solution<i64>;
pub use pipeline::{map_network, MappedCircuit, PipelineError};
pub use verify::verify_timing;
