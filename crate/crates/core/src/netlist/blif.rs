//! Reader for the combinational BLIF subset.
//!
//! Only `.names` covers that realize one of the canonical functions
//! (AND/OR/NAND/NOR/XOR/XNOR of any width, NOT, BUF) are accepted. Latches
//! are cut: the latch output becomes a primary input and the latch input a
//! primary output.

use std::collections::HashMap;

use super::{GateKind, NetlistError, Network, Node, NodeId};

const MAX_COVER_INPUTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CoverFn {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Buf,
    Not,
}

#[derive(Debug)]
struct NamesBlock {
    inputs: Vec<String>,
    output: String,
    line: usize,
    rows: Vec<(String, char, usize)>,
}

struct Line {
    number: usize,
    text: String,
}

fn logical_lines(text: &str) -> Vec<Line> {
    let mut out = Vec::new();
    let mut pending: Option<Line> = None;
    for (i, raw) in text.lines().enumerate() {
        let stripped = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let (body, continues) = match stripped.trim_end().strip_suffix('\\') {
            Some(b) => (b, true),
            None => (stripped, false),
        };
        let line = match pending.take() {
            Some(mut l) => {
                l.text.push(' ');
                l.text.push_str(body);
                l
            }
            None => Line {
                number: i + 1,
                text: body.to_string(),
            },
        };
        if continues {
            pending = Some(line);
        } else if !line.text.trim().is_empty() {
            out.push(line);
        }
    }
    if let Some(l) = pending {
        if !l.text.trim().is_empty() {
            out.push(l);
        }
    }
    out
}

fn column_of(text: &str, token: &str) -> usize {
    text.find(token).map(|p| p + 1).unwrap_or(1)
}

fn syntax(line: &Line, token: &str, message: impl Into<String>) -> NetlistError {
    NetlistError::Syntax {
        line: line.number,
        column: column_of(&line.text, token),
        message: message.into(),
    }
}

fn classify_cover(block: &NamesBlock) -> Result<CoverFn, NetlistError> {
    let k = block.inputs.len();
    let unsupported = |reason: &str| NetlistError::UnsupportedTable {
        line: block.line,
        signal: block.output.clone(),
        reason: reason.to_string(),
    };
    if k == 0 {
        return Err(unsupported("constant functions are not supported"));
    }
    if k > MAX_COVER_INPUTS {
        return Err(unsupported("too many inputs"));
    }
    if block.rows.is_empty() {
        return Err(unsupported("constant functions are not supported"));
    }
    let polarity = block.rows[0].1;
    if block.rows.iter().any(|r| r.1 != polarity) {
        return Err(unsupported("mixed on-set and off-set rows"));
    }
    let size = 1usize << k;
    let mut table = vec![false; size];
    for (m, slot) in table.iter_mut().enumerate() {
        *slot = block.rows.iter().any(|(pattern, _, _)| {
            pattern.bytes().enumerate().all(|(i, c)| {
                let bit = (m >> i) & 1 == 1;
                match c {
                    b'1' => bit,
                    b'0' => !bit,
                    _ => true,
                }
            })
        });
    }
    if polarity == '0' {
        table.iter_mut().for_each(|b| *b = !*b);
    }
    let all = size - 1;
    let matches = |f: &dyn Fn(usize) -> bool| (0..size).all(|m| table[m] == f(m));
    if matches(&|_| false) || matches(&|_| true) {
        return Err(unsupported("constant functions are not supported"));
    }
    if k == 1 {
        return Ok(if table[1] { CoverFn::Buf } else { CoverFn::Not });
    }
    let candidates: [(CoverFn, &dyn Fn(usize) -> bool); 6] = [
        (CoverFn::And, &|m| m == all),
        (CoverFn::Or, &|m| m != 0),
        (CoverFn::Nand, &|m| m != all),
        (CoverFn::Nor, &|m| m == 0),
        (CoverFn::Xor, &|m: usize| m.count_ones() % 2 == 1),
        (CoverFn::Xnor, &|m: usize| m.count_ones() % 2 == 0),
    ];
    for (func, f) in candidates {
        if matches(f) {
            return Ok(func);
        }
    }
    Err(unsupported("not a recognized gate pattern"))
}

/// Parses a BLIF model into a [`Network`].
pub fn parse_blif(text: &str) -> Result<Network, NetlistError> {
    let lines = logical_lines(text);
    let mut model_name: Option<String> = None;
    let mut inputs: Vec<(String, usize)> = Vec::new();
    let mut outputs: Vec<(String, usize)> = Vec::new();
    let mut blocks: Vec<NamesBlock> = Vec::new();
    let mut latches: Vec<(String, String, usize)> = Vec::new();
    let mut in_names = false;
    let mut ended = false;

    for line in &lines {
        let tokens: Vec<&str> = line.text.split_whitespace().collect();
        let head = tokens[0];
        if ended {
            if head == ".model" {
                return Err(NetlistError::Unsupported(
                    "multiple models (hierarchical BLIF)".to_string(),
                ));
            }
            return Err(syntax(line, head, "content after .end"));
        }
        if !head.starts_with('.') {
            if !in_names {
                return Err(syntax(line, head, "cover row outside of a .names block"));
            }
            let block = blocks.last_mut().expect("in_names implies a block");
            let k = block.inputs.len();
            let (pattern, out) = match (k, tokens.as_slice()) {
                (0, [o]) => (String::new(), *o),
                (_, [p, o]) if k > 0 => (p.to_string(), *o),
                _ => return Err(syntax(line, head, format!("expected {} column(s)", if k == 0 { 1 } else { 2 }))),
            };
            if pattern.len() != k {
                return Err(syntax(
                    line,
                    head,
                    format!("input pattern has {} characters, expected {k}", pattern.len()),
                ));
            }
            if let Some(bad) = pattern.chars().find(|c| !matches!(c, '0' | '1' | '-')) {
                return Err(syntax(line, head, format!("invalid pattern character '{bad}'")));
            }
            let out_char = match out {
                "0" => '0',
                "1" => '1',
                _ => return Err(syntax(line, out, format!("invalid output value '{out}'"))),
            };
            block.rows.push((pattern, out_char, line.number));
            continue;
        }
        in_names = false;
        match head {
            ".model" => {
                if model_name.is_some() {
                    return Err(NetlistError::Unsupported(
                        "multiple models (hierarchical BLIF)".to_string(),
                    ));
                }
                model_name = Some(tokens.get(1).unwrap_or(&"top").to_string());
            }
            ".inputs" => inputs.extend(tokens[1..].iter().map(|t| (t.to_string(), line.number))),
            ".outputs" => outputs.extend(tokens[1..].iter().map(|t| (t.to_string(), line.number))),
            ".names" => {
                if tokens.len() < 2 {
                    return Err(syntax(line, head, ".names requires an output signal"));
                }
                let output = tokens[tokens.len() - 1].to_string();
                let ins = tokens[1..tokens.len() - 1].iter().map(|t| t.to_string()).collect();
                blocks.push(NamesBlock {
                    inputs: ins,
                    output,
                    line: line.number,
                    rows: Vec::new(),
                });
                in_names = true;
            }
            ".latch" => {
                if tokens.len() < 3 {
                    return Err(syntax(line, head, ".latch requires input and output signals"));
                }
                latches.push((tokens[1].to_string(), tokens[2].to_string(), line.number));
            }
            ".end" => ended = true,
            ".subckt" | ".gate" | ".mlatch" | ".search" | ".exdc" | ".start_kiss" => {
                return Err(NetlistError::Unsupported(format!("directive {head}")));
            }
            _ => return Err(syntax(line, head, format!("unknown directive {head}"))),
        }
    }

    build(model_name.unwrap_or_else(|| "top".to_string()), inputs, outputs, blocks, latches)
}

fn build(
    name: String,
    inputs: Vec<(String, usize)>,
    outputs: Vec<(String, usize)>,
    blocks: Vec<NamesBlock>,
    latches: Vec<(String, String, usize)>,
) -> Result<Network, NetlistError> {
    let mut driver: HashMap<String, NodeId> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();

    let define = |signal: &str, id: NodeId, driver: &mut HashMap<String, NodeId>| {
        if driver.insert(signal.to_string(), id).is_some() {
            Err(NetlistError::DuplicateDefinition(signal.to_string()))
        } else {
            Ok(())
        }
    };

    let pi_names = inputs
        .iter()
        .map(|(s, _)| s.clone())
        .chain(latches.iter().map(|(_, out, _)| out.clone()));
    for signal in pi_names {
        let id = nodes.len();
        define(&signal, id, &mut driver)?;
        nodes.push(Node {
            id,
            kind: GateKind::Pi,
            fanins: Vec::new(),
            name: Some(signal),
        });
    }

    let functions = blocks
        .iter()
        .map(classify_cover)
        .collect::<Result<Vec<_>, _>>()?;

    // One head node per block, in file order; helper nodes follow later.
    let head_base = nodes.len();
    for (i, block) in blocks.iter().enumerate() {
        define(&block.output, head_base + i, &mut driver)?;
    }
    let mut helpers: Vec<Node> = Vec::new();
    let mut heads: Vec<Node> = Vec::with_capacity(blocks.len());
    let helper_base = head_base + blocks.len();
    for (i, (block, func)) in blocks.iter().zip(&functions).enumerate() {
        let mut fanins = Vec::with_capacity(block.inputs.len());
        for s in &block.inputs {
            match driver.get(s) {
                Some(&id) => fanins.push(id),
                None => return Err(NetlistError::UndeclaredSignal(s.clone())),
            }
        }
        fanins.sort_unstable();
        let head_id = head_base + i;
        let (op, inverted) = match func {
            CoverFn::Buf => (GateKind::Buf, false),
            CoverFn::Not => (GateKind::Not, false),
            CoverFn::And => (GateKind::And, false),
            CoverFn::Or => (GateKind::Or, false),
            CoverFn::Xor => (GateKind::Xor, false),
            CoverFn::Nand => (GateKind::And, true),
            CoverFn::Nor => (GateKind::Or, true),
            CoverFn::Xnor => (GateKind::Xor, true),
        };
        let push_helper = |kind: GateKind, fanins: Vec<NodeId>, helpers: &mut Vec<Node>| {
            let id = helper_base + helpers.len();
            helpers.push(Node {
                id,
                kind,
                fanins,
                name: Some(format!("{}${}", block.output, helpers.len())),
            });
            id
        };
        let head = if op.arity() == 1 {
            Node {
                id: head_id,
                kind: op,
                fanins,
                name: Some(block.output.clone()),
            }
        } else {
            // Left-leaning tree; the last level is the head unless inverted.
            let mut acc = fanins[0];
            let levels = fanins.len() - 1;
            let mut head_fanins = Vec::new();
            for (level, &f) in fanins[1..].iter().enumerate() {
                let last = level + 1 == levels;
                if last && !inverted {
                    head_fanins = vec![acc, f];
                } else {
                    acc = push_helper(op, vec![acc, f], &mut helpers);
                }
            }
            if inverted {
                Node {
                    id: head_id,
                    kind: GateKind::Not,
                    fanins: vec![acc],
                    name: Some(block.output.clone()),
                }
            } else {
                Node {
                    id: head_id,
                    kind: op,
                    fanins: head_fanins,
                    name: Some(block.output.clone()),
                }
            }
        };
        heads.push(head);
    }
    nodes.extend(heads);
    nodes.extend(helpers);

    let mut po_signals: Vec<String> = Vec::new();
    for (s, _) in outputs.iter() {
        if !po_signals.contains(s) {
            po_signals.push(s.clone());
        }
    }
    for (input, _, _) in &latches {
        if !po_signals.contains(input) {
            po_signals.push(input.clone());
        }
    }
    if po_signals.is_empty() {
        return Err(NetlistError::NoOutputs);
    }
    for s in po_signals {
        let d = *driver
            .get(&s)
            .ok_or_else(|| NetlistError::UndeclaredSignal(s.clone()))?;
        let id = nodes.len();
        nodes.push(Node {
            id,
            kind: GateKind::Po,
            fanins: vec![d],
            name: Some(s),
        });
    }
    Network::from_nodes(name, nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_input_and() {
        let net = parse_blif(".model t\n.inputs a b\n.outputs y\n.names a b y\n11 1\n.end\n").unwrap();
        assert_eq!(net.primary_inputs().len(), 2);
        assert_eq!(net.primary_outputs().len(), 1);
        assert_eq!(net.count_kind(GateKind::And), 1);
        assert_eq!(net.gate_count(), 1);
        assert!(net.validate().ok());
    }

    #[test]
    fn empty_model_has_no_outputs() {
        let err = parse_blif(".model e\n.end\n").unwrap_err();
        assert_eq!(err, NetlistError::NoOutputs);
        assert_eq!(err.to_string(), "no primary outputs");
    }

    #[test]
    fn or_pattern() {
        let net = parse_blif(".model t\n.inputs a b\n.outputs c\n.names a b c\n1- 1\n-1 1\n.end\n").unwrap();
        assert_eq!(net.count_kind(GateKind::Or), 1);
        assert_eq!(net.gate_count(), 1);
    }

    /// Hand-written cover table for every recognized 2-input pattern.
    #[test]
    fn pattern_table() {
        let cases: &[(&str, GateKind, usize)] = &[
            ("11 1", GateKind::And, 1),
            ("0- 1\n-0 1", GateKind::And, 2), // NAND: AND + NOT
            ("00 1", GateKind::Or, 2),         // NOR: OR + NOT
            ("01 1\n10 1", GateKind::Xor, 1),
            ("00 1\n11 1", GateKind::Xor, 2), // XNOR
            ("11 0", GateKind::And, 2),       // off-set NAND
            ("00 0", GateKind::Or, 1),        // off-set OR
        ];
        for (rows, kind, gates) in cases {
            let text = format!(".model t\n.inputs a b\n.outputs y\n.names a b y\n{rows}\n.end\n");
            let net = parse_blif(&text).unwrap_or_else(|e| panic!("{rows}: {e}"));
            assert_eq!(net.count_kind(*kind), 1, "{rows}");
            assert_eq!(net.gate_count(), *gates, "{rows}");
        }
    }

    #[test]
    fn single_input_patterns() {
        let buf = parse_blif(".model t\n.inputs a\n.outputs y\n.names a y\n1 1\n").unwrap();
        assert_eq!(buf.count_kind(GateKind::Buf), 1);
        let inv = parse_blif(".model t\n.inputs a\n.outputs y\n.names a y\n0 1\n").unwrap();
        assert_eq!(inv.count_kind(GateKind::Not), 1);
    }

    #[test]
    fn wide_and_is_left_leaning_tree() {
        let net = parse_blif(".model t\n.inputs a b c d\n.outputs y\n.names d b a c y\n1111 1\n").unwrap();
        assert_eq!(net.count_kind(GateKind::And), 3);
        let y = net.find("y").unwrap();
        let head = net.node(net.fanins(net.primary_outputs()[0])[0]);
        assert_eq!(head.id, y);
        // head = AND(helper, d) where d has the largest id
        assert_eq!(head.fanins[1], net.find("d").unwrap());
        let inner = net.node(head.fanins[0]);
        assert_eq!(inner.fanins[1], net.find("c").unwrap());
        assert!(net.validate().ok());
    }

    #[test]
    fn three_input_xor() {
        let net = parse_blif(
            ".model t\n.inputs a b c\n.outputs y\n.names a b c y\n100 1\n010 1\n001 1\n111 1\n",
        )
        .unwrap();
        assert_eq!(net.count_kind(GateKind::Xor), 2);
    }

    #[test]
    fn rejects_unsupported_table() {
        let err = parse_blif(".model t\n.inputs a b c\n.outputs y\n.names a b c y\n11- 1\n--1 1\n").unwrap_err();
        assert!(matches!(err, NetlistError::UnsupportedTable { .. }), "{err}");
    }

    #[test]
    fn rejects_constants() {
        let err = parse_blif(".model t\n.inputs a\n.outputs y\n.names y\n1\n").unwrap_err();
        assert!(matches!(err, NetlistError::UnsupportedTable { .. }));
        let err = parse_blif(".model t\n.inputs a\n.outputs y\n.names a y\n1 1\n0 1\n").unwrap_err();
        assert!(matches!(err, NetlistError::UnsupportedTable { .. }));
    }

    #[test]
    fn reports_undeclared_and_duplicate() {
        let err = parse_blif(".model t\n.inputs a\n.outputs y\n.names a q y\n11 1\n").unwrap_err();
        assert_eq!(err, NetlistError::UndeclaredSignal("q".into()));
        let err = parse_blif(".model t\n.inputs a\n.outputs a\n.names a a\n0 1\n").unwrap_err();
        assert_eq!(err, NetlistError::DuplicateDefinition("a".into()));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_blif(".model t\n.inputs a b\n.outputs y\n.names a b y\n1x 1\n").unwrap_err();
        match err {
            NetlistError::Syntax { line, column, .. } => {
                assert_eq!(line, 5);
                assert_eq!(column, 1);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn latches_are_cut() {
        let text = "\
.model seq
.inputs a
.outputs y
.latch n q re clk 0
.names a q n
11 1
.names q y
0 1
.end
";
        let net = parse_blif(text).unwrap();
        // a and the latch output q become PIs; y and the latch input n become POs
        assert_eq!(net.primary_inputs().len(), 2);
        assert_eq!(net.primary_outputs().len(), 2);
        assert_eq!(net.count_kind(GateKind::Dff), 0);
        assert!(net.validate().ok());
    }

    #[test]
    fn comments_and_continuations() {
        let text = "# header\n.model t # name\n.inputs a \\\n b\n.outputs y\n.names a b \\\n y\n11 1\n.end\n";
        let net = parse_blif(text).unwrap();
        assert_eq!(net.primary_inputs().len(), 2);
        assert_eq!(net.count_kind(GateKind::And), 1);
    }

    #[test]
    fn rejects_subckt() {
        let err = parse_blif(".model t\n.inputs a\n.outputs y\n.subckt foo x=a y=y\n").unwrap_err();
        assert!(matches!(err, NetlistError::Unsupported(_)));
    }
}
