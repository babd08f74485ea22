//! Cost accounting and output emission: JSON report, DOT and annotated
//! netlist.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::decompose::{GateCategory, SfqNetwork};
use crate::netlist::{emit_json, GateKind, Network};
use crate::phase::StageAssignment;

const DEFAULT_COSTS: &str = include_str!("../data/default_costs.json");

/// Environment variable naming the default cost-table file.
pub const COST_TABLE_ENV: &str = "SFQMAP_COST_TABLE";

#[derive(Debug, Error)]
pub enum CostError {
    #[error("no cost entry for gate kind {0}")]
    Missing(GateKind),
    #[error("cost table: {0}")]
    Invalid(String),
    #[error("cost table {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// JJ count per gate kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostTable {
    costs: BTreeMap<GateKind, u64>,
}

impl Default for CostTable {
    /// The bundled placeholder table.
    fn default() -> Self {
        CostTable::from_json(DEFAULT_COSTS).expect("bundled cost table parses")
    }
}

impl CostTable {
    pub fn new(costs: BTreeMap<GateKind, u64>) -> Self {
        CostTable { costs }
    }

    /// Parses `{"KIND": integer, ...}`. Keys starting with `_` are ignored.
    pub fn from_json(text: &str) -> Result<Self, CostError> {
        let raw: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(text).map_err(|e| CostError::Invalid(e.to_string()))?;
        let mut costs = BTreeMap::new();
        for (key, value) in raw {
            if key.starts_with('_') {
                continue;
            }
            let kind = GateKind::from_name(&key)
                .ok_or_else(|| CostError::Invalid(format!("unknown gate kind '{key}'")))?;
            let jj = value
                .as_u64()
                .ok_or_else(|| CostError::Invalid(format!("cost of {key} must be a non-negative integer")))?;
            costs.insert(kind, jj);
        }
        Ok(CostTable { costs })
    }

    pub fn load(path: &Path) -> Result<Self, CostError> {
        let text = std::fs::read_to_string(path).map_err(|source| CostError::Io {
            path: path.display().to_string(),
            source,
        })?;
        CostTable::from_json(&text)
    }

    /// The table named by [`COST_TABLE_ENV`], else the bundled one.
    pub fn from_env() -> Result<Self, CostError> {
        match std::env::var_os(COST_TABLE_ENV) {
            Some(p) if !p.is_empty() => CostTable::load(Path::new(&p)),
            _ => Ok(CostTable::default()),
        }
    }

    pub fn get(&self, kind: GateKind) -> Option<u64> {
        self.costs.get(&kind).copied()
    }
}

/// Sum of per-gate costs over the network.
pub fn count_jjs(net: &Network, costs: &CostTable) -> Result<u64, CostError> {
    net.nodes()
        .iter()
        .map(|n| costs.get(n.kind).ok_or(CostError::Missing(n.kind)))
        .sum()
}

/// Status summary of the per-path DFF solves.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DffSummary {
    pub paths: usize,
    pub sites: usize,
    /// Number of paths per solver status.
    pub statuses: BTreeMap<String, usize>,
    /// Worst status over all paths.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MappingReport {
    pub circuit: String,
    pub phases: u32,
    pub objective_mode: String,
    pub or_style: String,
    pub spacing: String,
    pub seed: u64,
    pub gate_counts: BTreeMap<String, usize>,
    pub dff_count: usize,
    pub splitter_count: usize,
    pub jj_count: u64,
    pub epoch_depth: i64,
    pub throughput_factor: String,
    pub phase_status: String,
    pub phase_objective: i64,
    pub phase_nodes: u64,
    pub dff: DffSummary,
    pub verified: bool,
    pub violations: usize,
    /// Wall time per pipeline stage in milliseconds; only when requested,
    /// since it breaks byte-identical output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

/// Per-kind node counts, keyed by kind name.
pub fn gate_counts(net: &Network) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for n in net.nodes() {
        *counts.entry(n.kind.name().to_string()).or_insert(0) += 1;
    }
    counts
}

pub fn throughput_factor(n: u32) -> String {
    format!("1/{n}")
}

/// Canonical JSON: sorted keys, two-space indent, trailing newline.
pub fn emit_report_json(report: &MappingReport) -> String {
    let value = serde_json::to_value(report).expect("report serializes");
    let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
    text.push('\n');
    text
}

/// Annotated JSON netlist.
pub fn emit_netlist(sfq: &SfqNetwork, stages: &StageAssignment) -> String {
    emit_json(&sfq.net, Some((stages.n, &stages.sigma)))
}

/// Graphviz digraph with one rank per stage.
pub fn emit_dot(sfq: &SfqNetwork, stages: &StageAssignment) -> String {
    let mut out = String::new();
    let name = sfq.net.name().replace('"', "'");
    writeln!(out, "digraph \"{name}\" {{").expect("write to string");
    writeln!(out, "  rankdir=LR;").expect("write to string");
    writeln!(out, "  node [fontname=\"Helvetica\"];").expect("write to string");
    let mut by_stage: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for n in sfq.net.nodes() {
        by_stage.entry(stages.stage(n.id)).or_default().push(n.id);
    }
    for (stage, ids) in &by_stage {
        writeln!(out, "  subgraph cluster_stage_{stage} {{").expect("write to string");
        writeln!(out, "    label=\"stage {stage}\";").expect("write to string");
        writeln!(out, "    rank=same;").expect("write to string");
        for &id in ids {
            let node = sfq.net.node(id);
            let shape = match sfq.category(id) {
                GateCategory::AS => "box",
                GateCategory::SA => "doubleoctagon",
                GateCategory::AA => "ellipse",
                GateCategory::IO => "plaintext",
            };
            let mut label = format!(
                "{}@{} ({}.{})",
                node.kind,
                stages.stage(id),
                stages.epoch(id),
                stages.phase(id)
            );
            if let Some(n) = &node.name {
                label = format!("{}\\n{}", n.replace('"', "'"), label);
            }
            writeln!(out, "    n{id} [label=\"{label}\", shape={shape}];").expect("write to string");
        }
        writeln!(out, "  }}").expect("write to string");
    }
    for (u, v, _) in sfq.net.edges() {
        writeln!(out, "  n{u} -> n{v};").expect("write to string");
    }
    writeln!(out, "}}").expect("write to string");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{decompose, OrStyle};

    fn table(pairs: &[(GateKind, u64)]) -> CostTable {
        CostTable::new(pairs.iter().copied().collect())
    }

    #[test]
    fn jj_sum() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let x = net.add_gate(GateKind::Not, &[a]);
        let s = net.add_gate(GateKind::Splitter, &[x]);
        let y = net.add_gate(GateKind::Not, &[s]);
        let d = net.add_gate(GateKind::Dff, &[s]);
        net.add_output(y, "y");
        net.add_output(d, "z");
        let costs = table(&[
            (GateKind::Not, 9),
            (GateKind::Dff, 6),
            (GateKind::Splitter, 3),
            (GateKind::Pi, 0),
            (GateKind::Po, 0),
        ]);
        assert_eq!(count_jjs(&net, &costs).unwrap(), 27);
    }

    #[test]
    fn jj_empty_and_missing() {
        let costs = table(&[(GateKind::Not, 9)]);
        assert_eq!(count_jjs(&Network::new("e"), &costs).unwrap(), 0);
        let mut net = Network::new("t");
        net.add_input("a");
        assert!(matches!(count_jjs(&net, &costs), Err(CostError::Missing(GateKind::Pi))));
    }

    #[test]
    fn default_table_covers_all_kinds() {
        let t = CostTable::default();
        for k in GateKind::ALL {
            assert!(t.get(k).is_some(), "{k}");
        }
    }

    #[test]
    fn cost_table_rejects_bad_entries() {
        assert!(CostTable::from_json(r#"{"LUT": 3}"#).is_err());
        assert!(CostTable::from_json(r#"{"AND": -3}"#).is_err());
        assert_eq!(CostTable::from_json(r#"{"and": 4}"#).unwrap().get(GateKind::And), Some(4));
    }

    fn chain() -> (SfqNetwork, StageAssignment) {
        let mut net = Network::new("c");
        let a = net.add_input("a");
        let x = net.add_gate(GateKind::Not, &[a]);
        net.add_output(x, "y");
        let sfq = decompose(&net, OrStyle::Merger).unwrap();
        (sfq, StageAssignment::new(2, vec![0, 1, 1]))
    }

    #[test]
    fn dot_chain() {
        let (sfq, st) = chain();
        let dot = emit_dot(&sfq, &st);
        assert_eq!(dot.matches(" -> ").count(), 2);
        assert_eq!(dot.matches("[label=").count(), 3);
        assert!(dot.contains("NOT@1 (0.1)"));
    }

    #[test]
    fn dot_empty() {
        let sfq = SfqNetwork::from_network(Network::new("e")).unwrap();
        let dot = emit_dot(&sfq, &StageAssignment::new(1, vec![]));
        assert!(!dot.contains("->"));
        assert!(dot.starts_with("digraph"));
    }

    #[test]
    fn netlist_annotations() {
        let (sfq, st) = chain();
        let text = emit_netlist(&sfq, &st);
        let (net, ann) = crate::netlist::parse_json(&text).unwrap();
        assert_eq!(net, sfq.net);
        assert_eq!(ann.unwrap().stages().unwrap(), st.sigma);
    }

    #[test]
    fn throughput_string() {
        assert_eq!(throughput_factor(7), "1/7");
    }
}
