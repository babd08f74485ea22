//! Gate-level netlist representation.
//!
//! A [`Network`] is a flat list of nodes with ordered fanin lists. Primary
//! inputs and outputs are explicit pseudo-nodes (`PI`/`PO`) so that every
//! edge of the logic graph, including the ones that terminate at an output,
//! is represented the same way. Node ids are dense indices into the node list.

mod blif;
mod json;
mod sim;

use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blif::parse_blif;
pub use json::{emit_json, parse_json, NetlistJson, StageAnnotation};
pub use sim::{equivalent, simulate, simulate_packed, SimError, EXHAUSTIVE_INPUT_LIMIT, RANDOM_VECTORS};

/// Dense node index.
pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Pi,
    Po,
    And,
    Or,
    Xor,
    Not,
    Buf,
    Dff,
    Splitter,
    Merger,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::Pi,
        GateKind::Po,
        GateKind::And,
        GateKind::Or,
        GateKind::Xor,
        GateKind::Not,
        GateKind::Buf,
        GateKind::Dff,
        GateKind::Splitter,
        GateKind::Merger,
    ];

    /// Required number of fanins.
    pub fn arity(self) -> usize {
        match self {
            GateKind::Pi => 0,
            GateKind::Po | GateKind::Not | GateKind::Buf | GateKind::Dff | GateKind::Splitter => 1,
            GateKind::And | GateKind::Or | GateKind::Xor | GateKind::Merger => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Pi => "PI",
            GateKind::Po => "PO",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
            GateKind::Not => "NOT",
            GateKind::Buf => "BUF",
            GateKind::Dff => "DFF",
            GateKind::Splitter => "SPLITTER",
            GateKind::Merger => "MERGER",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name))
    }

    pub fn is_io(self) -> bool {
        matches!(self, GateKind::Pi | GateKind::Po)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub kind: GateKind,
    pub fanins: Vec<NodeId>,
    pub name: Option<String>,
}

/// A directed gate-level netlist.
///
/// The network may be structurally invalid right after construction (for
/// example a parsed file may contain a cycle); call [`Network::validate`]
/// before handing it to the mapping passes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    name: String,
    nodes: Vec<Node>,
    inputs: Vec<NodeId>,
    outputs: Vec<NodeId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: unsupported truth table for '{signal}': {reason}")]
    UnsupportedTable {
        line: usize,
        signal: String,
        reason: String,
    },
    #[error("undeclared signal '{0}'")]
    UndeclaredSignal(String),
    #[error("duplicate definition of '{0}'")]
    DuplicateDefinition(String),
    #[error("no primary outputs")]
    NoOutputs,
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("malformed netlist: {0}")]
    Malformed(String),
    #[error("cycle detected through node {0}")]
    Cycle(NodeId),
}

/// One violated structural or timing rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub node: Option<NodeId>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, rule: &'static str, node: Option<NodeId>, message: impl Into<String>) {
        self.violations.push(Violation {
            rule,
            node,
            message: message.into(),
        });
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match v.node {
                Some(n) => write!(f, "[{}] node {}: {}", v.rule, n, v.message)?,
                None => write!(f, "[{}] {}", v.rule, v.message)?,
            }
        }
        Ok(())
    }
}

impl Network {
    pub fn new(name: impl Into<String>) -> Self {
        Network {
            name: name.into(),
            nodes: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Builds a network from an explicit node list. Ids must be dense and
    /// equal to list positions; PI/PO membership is derived from node kinds
    /// in id order.
    pub fn from_nodes(name: impl Into<String>, nodes: Vec<Node>) -> Result<Self, NetlistError> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(NetlistError::Malformed(format!(
                    "node ids must be dense: position {i} holds id {}",
                    n.id
                )));
            }
        }
        let inputs = nodes.iter().filter(|n| n.kind == GateKind::Pi).map(|n| n.id).collect();
        let outputs = nodes.iter().filter(|n| n.kind == GateKind::Po).map(|n| n.id).collect();
        Ok(Network {
            name: name.into(),
            nodes,
            inputs,
            outputs,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn add_node(&mut self, kind: GateKind, fanins: Vec<NodeId>, name: Option<String>) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node {
            id,
            kind,
            fanins,
            name,
        });
        match kind {
            GateKind::Pi => self.inputs.push(id),
            GateKind::Po => self.outputs.push(id),
            _ => {}
        }
        id
    }

    pub fn add_input(&mut self, name: impl Into<String>) -> NodeId {
        self.add_node(GateKind::Pi, Vec::new(), Some(name.into()))
    }

    pub fn add_output(&mut self, driver: NodeId, name: impl Into<String>) -> NodeId {
        self.add_node(GateKind::Po, vec![driver], Some(name.into()))
    }

    pub fn add_gate(&mut self, kind: GateKind, fanins: &[NodeId]) -> NodeId {
        self.add_node(kind, fanins.to_vec(), None)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn kind(&self, id: NodeId) -> GateKind {
        self.nodes[id].kind
    }

    pub fn fanins(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].fanins
    }

    pub(crate) fn fanins_mut(&mut self, id: NodeId) -> &mut Vec<NodeId> {
        &mut self.nodes[id].fanins
    }

    pub fn primary_inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    pub fn primary_outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    /// Number of nodes that are neither PI nor PO.
    pub fn gate_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.kind.is_io()).count()
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Fanout lists as `(sink, fanin slot)` pairs, ordered by sink id then slot.
    pub fn fanouts(&self) -> Vec<Vec<(NodeId, usize)>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for n in &self.nodes {
            for (slot, &f) in n.fanins.iter().enumerate() {
                if f < out.len() {
                    out[f].push((n.id, slot));
                }
            }
        }
        out
    }

    /// All edges `(from, to, slot)` in sink-id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, usize)> + '_ {
        self.nodes.iter().flat_map(|n| {
            n.fanins
                .iter()
                .enumerate()
                .map(move |(slot, &f)| (f, n.id, slot))
        })
    }

    /// Checks every structural invariant and lists all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                report.push("dense-ids", Some(i), format!("node at position {i} has id {}", node.id));
            }
            if node.fanins.len() != node.kind.arity() {
                report.push(
                    "arity",
                    Some(i),
                    format!(
                        "{} expects {} fanin(s), found {}",
                        node.kind,
                        node.kind.arity(),
                        node.fanins.len()
                    ),
                );
            }
            for &f in &node.fanins {
                if f >= n {
                    report.push("fanin-range", Some(i), format!("fanin {f} does not exist"));
                } else if self.nodes[f].kind == GateKind::Po {
                    report.push("po-fanout", Some(i), format!("primary output {f} used as a fanin"));
                }
            }
        }
        if self.outputs.is_empty() {
            report.push("no-outputs", None, "network has no primary outputs");
        }
        if let Some(v) = self.find_cycle() {
            report.push("cycle", Some(v), format!("cycle through node {v}"));
        }
        report
    }

    /// Returns a node on a directed cycle, if any (iterative DFS).
    fn find_cycle(&self) -> Option<NodeId> {
        let n = self.nodes.len();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        for root in 0..n {
            if state[root] != 0 {
                continue;
            }
            let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
            state[root] = 1;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                let fanins = &self.nodes[v].fanins;
                if *next < fanins.len() {
                    let f = fanins[*next];
                    *next += 1;
                    if f >= n {
                        continue;
                    }
                    match state[f] {
                        0 => {
                            state[f] = 1;
                            stack.push((f, 0));
                        }
                        1 => return Some(f),
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    /// Kahn's algorithm with ascending-id tie breaking.
    pub fn topological_order(&self) -> Result<Vec<NodeId>, NetlistError> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        let fanouts = self.fanouts();
        for node in &self.nodes {
            for &f in &node.fanins {
                if f >= n {
                    return Err(NetlistError::Malformed(format!(
                        "node {} references missing fanin {f}",
                        node.id
                    )));
                }
            }
            indegree[node.id] = node.fanins.len();
        }
        let mut ready: BinaryHeap<Reverse<NodeId>> =
            (0..n).filter(|&v| indegree[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &(w, _) in &fanouts[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.push(Reverse(w));
                }
            }
        }
        if order.len() != n {
            let stuck = (0..n).find(|&v| indegree[v] > 0).unwrap_or(0);
            return Err(NetlistError::Cycle(stuck));
        }
        Ok(order)
    }

    /// Looks up a node by its name.
    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .find(|n| n.name.as_deref() == Some(name))
            .map(|n| n.id)
    }
}

/// Parses either BLIF or the native JSON format, chosen by the first
/// non-blank character (`{` selects JSON).
pub fn parse_netlist(text: &str) -> Result<Network, NetlistError> {
    if text.trim_start().starts_with('{') {
        parse_json(text).map(|(net, _)| net)
    } else {
        parse_blif(text)
    }
}
