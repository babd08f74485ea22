//! SFQ gate categories and decomposition into SFQ primitives.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::netlist::{GateKind, NetlistError, Network, Node, NodeId};
use crate::report::CostTable;
use crate::solver::SolverBudget;

/// Synchronization category of a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GateCategory {
    /// Asynchronous in, asynchronous out: splitter, merger.
    AA,
    /// Asynchronous in, synchronous out (clocked): NOT, XOR, DFF.
    AS,
    /// Synchronous in, asynchronous out: AND, SA-style OR.
    SA,
    /// PI/PO pseudo-nodes.
    IO,
}

impl GateCategory {
    pub fn name(self) -> &'static str {
        match self {
            GateCategory::AA => "AA",
            GateCategory::AS => "AS",
            GateCategory::SA => "SA",
            GateCategory::IO => "IO",
        }
    }
}

impl fmt::Display for GateCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveMode {
    /// One floor term per gate over the latest fanout.
    #[default]
    GateMax,
    /// One floor term per edge.
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrStyle {
    /// OR becomes an asynchronous merger.
    #[default]
    Merger,
    /// OR stays a clocked-input SA gate.
    SaOr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacingMode {
    /// At least one clocked element in every n consecutive stages.
    #[default]
    Window,
    /// Windows of n+1 stages (chains whose stage span is exactly n).
    /// Debug comparison only; it admits gaps of n+1.
    ChainLiteral,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown value '{0}'")]
pub struct ParseEnumError(pub String);

impl FromStr for ObjectiveMode {
    type Err = ParseEnumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gate-max" => Ok(ObjectiveMode::GateMax),
            "edge" => Ok(ObjectiveMode::Edge),
            _ => Err(ParseEnumError(s.to_string())),
        }
    }
}

impl FromStr for OrStyle {
    type Err = ParseEnumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "merger" => Ok(OrStyle::Merger),
            "sa-or" => Ok(OrStyle::SaOr),
            _ => Err(ParseEnumError(s.to_string())),
        }
    }
}

impl FromStr for SpacingMode {
    type Err = ParseEnumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "window" => Ok(SpacingMode::Window),
            "chain-literal" => Ok(SpacingMode::ChainLiteral),
            _ => Err(ParseEnumError(s.to_string())),
        }
    }
}

impl ObjectiveMode {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveMode::GateMax => "gate-max",
            ObjectiveMode::Edge => "edge",
        }
    }
}

impl OrStyle {
    pub fn name(self) -> &'static str {
        match self {
            OrStyle::Merger => "merger",
            OrStyle::SaOr => "sa-or",
        }
    }
}

impl SpacingMode {
    pub fn name(self) -> &'static str {
        match self {
            SpacingMode::Window => "window",
            SpacingMode::ChainLiteral => "chain-literal",
        }
    }
}

/// Everything that parameterizes one mapping run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingConfig {
    /// Number of clock phases, at least 1.
    pub n: u32,
    pub objective: ObjectiveMode,
    pub or_style: OrStyle,
    /// Budget for the phase-assignment solve.
    pub phase_budget: SolverBudget,
    /// Budget for each independent-path DFF solve.
    pub dff_budget: SolverBudget,
    /// Recorded in reports. The search itself is deterministic.
    pub seed: u64,
    pub cost_table: CostTable,
    pub spacing: SpacingMode,
    /// Worker threads for per-path solving; `None` uses all processors.
    pub threads: Option<usize>,
}

impl MappingConfig {
    pub fn new(n: u32) -> Self {
        MappingConfig {
            n,
            objective: ObjectiveMode::default(),
            or_style: OrStyle::default(),
            phase_budget: SolverBudget::seconds(20.0),
            dff_budget: SolverBudget::seconds(2.0),
            seed: 0,
            cost_table: CostTable::default(),
            spacing: SpacingMode::default(),
            threads: None,
        }
    }

    /// Replaces wall-clock limits by node limits so runs are reproducible.
    pub fn with_node_limits(mut self, phase_nodes: u64, dff_nodes: u64) -> Self {
        self.phase_budget = SolverBudget::nodes(phase_nodes);
        self.dff_budget = SolverBudget::nodes(dff_nodes);
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("gate kind {0} has no SFQ primitive")]
    NonPrimitive(GateKind),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Category of an SFQ primitive kind.
pub fn classify(kind: GateKind, or_style: OrStyle) -> Result<GateCategory, DecomposeError> {
    match kind {
        GateKind::Pi | GateKind::Po => Ok(GateCategory::IO),
        GateKind::Splitter | GateKind::Merger => Ok(GateCategory::AA),
        GateKind::Not | GateKind::Xor | GateKind::Dff => Ok(GateCategory::AS),
        GateKind::And => Ok(GateCategory::SA),
        GateKind::Or => Ok(match or_style {
            OrStyle::Merger => GateCategory::AA,
            OrStyle::SaOr => GateCategory::SA,
        }),
        GateKind::Buf => Err(DecomposeError::NonPrimitive(kind)),
    }
}

/// A network made of SFQ primitives with the category of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SfqNetwork {
    pub net: Network,
    pub category: Vec<GateCategory>,
}

impl SfqNetwork {
    /// Categorizes an existing primitive network. `OR` nodes are SA gates
    /// here; mergers are the asynchronous OR.
    pub fn from_network(net: Network) -> Result<Self, DecomposeError> {
        let category = net
            .nodes()
            .iter()
            .map(|n| classify(n.kind, OrStyle::SaOr))
            .collect::<Result<_, _>>()?;
        Ok(SfqNetwork { net, category })
    }

    pub fn len(&self) -> usize {
        self.net.len()
    }

    pub fn is_empty(&self) -> bool {
        self.net.is_empty()
    }

    pub fn category(&self, id: NodeId) -> GateCategory {
        self.category[id]
    }

    pub fn is_as(&self, id: NodeId) -> bool {
        self.category[id] == GateCategory::AS
    }

    pub fn is_sa(&self, id: NodeId) -> bool {
        self.category[id] == GateCategory::SA
    }

    pub fn is_aa(&self, id: NodeId) -> bool {
        self.category[id] == GateCategory::AA
    }

    pub fn kind(&self, id: NodeId) -> GateKind {
        self.net.kind(id)
    }

    pub(crate) fn push(&mut self, kind: GateKind, fanins: Vec<NodeId>) -> NodeId {
        let id = self.net.add_node(kind, fanins, None);
        self.category
            .push(classify(kind, OrStyle::SaOr).expect("primitive kind"));
        id
    }
}

/// Maps every gate to one SFQ primitive. DFF, BUF and SPLITTER nodes are
/// dissolved (their fanouts reconnect to their fanin); OR becomes a merger
/// or stays an SA gate per `or_style`. Remaining ids are compacted in order.
pub fn decompose(net: &Network, or_style: OrStyle) -> Result<SfqNetwork, DecomposeError> {
    let order = net.topological_order()?;
    // Representative of each node after dissolving pass-through gates.
    let mut rep: Vec<NodeId> = (0..net.len()).collect();
    for &v in &order {
        if matches!(net.kind(v), GateKind::Dff | GateKind::Buf | GateKind::Splitter) {
            rep[v] = rep[net.fanins(v)[0]];
        }
    }
    let mut new_id = vec![usize::MAX; net.len()];
    let mut kept = 0;
    for n in net.nodes() {
        if rep[n.id] == n.id {
            new_id[n.id] = kept;
            kept += 1;
        }
    }
    let mut nodes = Vec::with_capacity(kept);
    let mut category = Vec::with_capacity(kept);
    for n in net.nodes() {
        if rep[n.id] != n.id {
            continue;
        }
        let kind = match (n.kind, or_style) {
            (GateKind::Or, OrStyle::Merger) => GateKind::Merger,
            (k, _) => k,
        };
        category.push(classify(kind, OrStyle::SaOr)?);
        nodes.push(Node {
            id: new_id[n.id],
            kind,
            fanins: n.fanins.iter().map(|&f| new_id[rep[f]]).collect(),
            name: n.name.clone(),
        });
    }
    let out = Network::from_nodes(net.name(), nodes)?;
    Ok(SfqNetwork { net: out, category })
}
