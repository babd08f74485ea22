//! Native JSON netlist format, optionally annotated with clock stages.
//!
//! ```json
//! { "name": "c17", "phases": 4, "inputs": [0, 1], "outputs": [5],
//!   "gates": [ { "id": 0, "kind": "PI", "fanins": [], "name": "a",
//!                "stage": 0, "epoch": 0, "phase": 0 }, ... ] }
//! ```
//!
//! `phases` and the per-gate `stage`/`epoch`/`phase` fields are present only
//! in mapped netlists. Keys are emitted in sorted order and gates by id.

use serde::{Deserialize, Serialize};

use super::{GateKind, NetlistError, Network, Node, NodeId};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateJson {
    pub id: NodeId,
    pub kind: GateKind,
    #[serde(default)]
    pub fanins: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetlistJson {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<u32>,
    pub inputs: Vec<NodeId>,
    pub outputs: Vec<NodeId>,
    pub gates: Vec<GateJson>,
}

/// Per-node stage annotations read from a mapped netlist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageAnnotation {
    pub phases: u32,
    /// `(stage, epoch, phase)` per node id; `None` where the gate carries no
    /// annotation.
    pub entries: Vec<Option<(i64, Option<i64>, Option<i64>)>>,
}

impl StageAnnotation {
    /// Stage per node, if every node is annotated.
    pub fn stages(&self) -> Option<Vec<i64>> {
        self.entries.iter().map(|e| e.map(|(s, _, _)| s)).collect()
    }
}

/// Parses a JSON netlist; returns stage annotations when `phases` is present.
pub fn parse_json(text: &str) -> Result<(Network, Option<StageAnnotation>), NetlistError> {
    let doc: NetlistJson = serde_json::from_str(text).map_err(|e| NetlistError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut gates = doc.gates;
    gates.sort_by_key(|g| g.id);
    for (i, g) in gates.iter().enumerate() {
        if g.id != i {
            return Err(if i > 0 && gates[i - 1].id == g.id {
                NetlistError::DuplicateDefinition(format!("gate id {}", g.id))
            } else {
                NetlistError::Malformed(format!("gate ids must be dense 0..N-1, missing id {i}"))
            });
        }
    }
    for g in &gates {
        if let Some(&f) = g.fanins.iter().find(|&&f| f >= gates.len()) {
            return Err(NetlistError::UndeclaredSignal(format!("gate id {f}")));
        }
    }
    let annotation = doc.phases.map(|phases| StageAnnotation {
        phases,
        entries: gates
            .iter()
            .map(|g| g.stage.map(|s| (s, g.epoch, g.phase)))
            .collect(),
    });
    let nodes: Vec<Node> = gates
        .into_iter()
        .map(|g| Node {
            id: g.id,
            kind: g.kind,
            fanins: g.fanins,
            name: g.name,
        })
        .collect();
    let net = Network::from_nodes(doc.name, nodes)?;

    let mut declared_in = doc.inputs.clone();
    declared_in.sort_unstable();
    let mut declared_out = doc.outputs.clone();
    declared_out.sort_unstable();
    if declared_in != net.primary_inputs() {
        return Err(NetlistError::Malformed(
            "'inputs' does not match the gates of kind PI".to_string(),
        ));
    }
    if declared_out != net.primary_outputs() {
        return Err(NetlistError::Malformed(
            "'outputs' does not match the gates of kind PO".to_string(),
        ));
    }
    if net.primary_outputs().is_empty() {
        return Err(NetlistError::NoOutputs);
    }
    Ok((net, annotation))
}

/// Emits the network as JSON; with `stages = Some((n, sigma))` each gate is
/// annotated with its stage, epoch and phase.
pub fn emit_json(net: &Network, stages: Option<(u32, &[i64])>) -> String {
    let gates = net
        .nodes()
        .iter()
        .map(|n| {
            let (stage, epoch, phase) = match stages {
                Some((phases, sigma)) => {
                    let s = sigma[n.id];
                    let p = i64::from(phases);
                    (Some(s), Some(s.div_euclid(p)), Some(s.rem_euclid(p)))
                }
                None => (None, None, None),
            };
            GateJson {
                id: n.id,
                kind: n.kind,
                fanins: n.fanins.clone(),
                name: n.name.clone(),
                stage,
                epoch,
                phase,
            }
        })
        .collect();
    let doc = NetlistJson {
        name: net.name().to_string(),
        phases: stages.map(|(n, _)| n),
        inputs: net.primary_inputs().to_vec(),
        outputs: net.primary_outputs().to_vec(),
        gates,
    };
    // Going through `Value` sorts object keys.
    let value = serde_json::to_value(&doc).expect("netlist serializes");
    let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Network {
        let mut net = Network::new("s");
        let a = net.add_input("a");
        let b = net.add_input("b");
        let g = net.add_gate(GateKind::Xor, &[a, b]);
        net.add_output(g, "y");
        net
    }

    #[test]
    fn round_trip_plain() {
        let net = sample();
        let text = emit_json(&net, None);
        let (back, ann) = parse_json(&text).unwrap();
        assert_eq!(back, net);
        assert!(ann.is_none());
    }

    #[test]
    fn round_trip_annotated() {
        let net = sample();
        let sigma = [0, 1, 2, 2];
        let text = emit_json(&net, Some((2, &sigma)));
        assert!(text.contains("\"epoch\": 1"));
        let (back, ann) = parse_json(&text).unwrap();
        assert_eq!(back, net);
        let ann = ann.unwrap();
        assert_eq!(ann.phases, 2);
        assert_eq!(ann.stages().unwrap(), sigma.to_vec());
        assert_eq!(ann.entries[2], Some((2, Some(1), Some(0))));
    }

    #[test]
    fn field_order_is_irrelevant() {
        let text = r#"{"gates":[{"fanins":[],"kind":"PI","id":0},
            {"kind":"PO","fanins":[2],"id":1},{"id":2,"fanins":[0],"kind":"NOT"}],
            "outputs":[1],"inputs":[0],"name":"x"}"#;
        let (net, _) = parse_json(text).unwrap();
        assert_eq!(net.kind(2), GateKind::Not);
        assert!(net.validate().ok());
    }

    #[test]
    fn rejects_sparse_ids() {
        let text = r#"{"name":"x","inputs":[0],"outputs":[2],
            "gates":[{"id":0,"kind":"PI"},{"id":2,"kind":"PO","fanins":[0]}]}"#;
        assert!(matches!(parse_json(text), Err(NetlistError::Malformed(_))));
    }

    #[test]
    fn rejects_bad_kind() {
        let text = r#"{"name":"x","inputs":[0],"outputs":[1],
            "gates":[{"id":0,"kind":"PI"},{"id":1,"kind":"LUT4","fanins":[0]}]}"#;
        assert!(matches!(parse_json(text), Err(NetlistError::Syntax { .. })));
    }
}
