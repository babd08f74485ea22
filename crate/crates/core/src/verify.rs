//! Timing and structure checks of a mapped network, independent of the
//! constraint builders.

use crate::decompose::{GateCategory, SfqNetwork};
use crate::netlist::{GateKind, NodeId, StageAnnotation, ValidationReport};
use crate::phase::StageAssignment;

/// Clocked stages reachable from a node through asynchronous gates only.
#[derive(Debug, Clone, Copy)]
struct Downstream {
    /// Latest clocked sink.
    latest: Option<i64>,
    /// Earliest sink that must sit strictly later than its source (AS, DFF).
    strict: Option<i64>,
    /// Earliest sink allowed at the source stage (SA, PO).
    weak: Option<i64>,
}

impl Downstream {
    const NONE: Downstream = Downstream {
        latest: None,
        strict: None,
        weak: None,
    };

    fn merge(self, o: Downstream) -> Downstream {
        fn pick(a: Option<i64>, b: Option<i64>, f: fn(i64, i64) -> i64) -> Option<i64> {
            match (a, b) {
                (Some(x), Some(y)) => Some(f(x, y)),
                (x, None) => x,
                (None, y) => y,
            }
        }
        Downstream {
            latest: pick(self.latest, o.latest, i64::max),
            strict: pick(self.strict, o.strict, i64::min),
            weak: pick(self.weak, o.weak, i64::min),
        }
    }
}

fn clocked_source(kind: GateKind, cat: GateCategory) -> bool {
    kind == GateKind::Pi || matches!(cat, GateCategory::AS | GateCategory::SA)
}

/// Checks a mapped network: edge order (strict into AS gates, except a DFF
/// fed by an asynchronous gate), spacing of consecutive clocked
/// elements (at most `n` stages), SA gates fed at their own stage, PIs in
/// epoch 0, one shared PO epoch, fanout legality and strictly increasing
/// clocked stages along every walk.
pub fn verify_timing(sfq: &SfqNetwork, stages: &StageAssignment) -> ValidationReport {
    let mut report = ValidationReport::default();
    let net = &sfq.net;
    let n = i64::from(stages.n);
    if stages.n == 0 {
        report.push("phases", None, "phase count must be positive");
        return report;
    }
    if stages.sigma.len() != net.len() {
        report.push(
            "stage-count",
            None,
            format!("{} stages for {} nodes", stages.sigma.len(), net.len()),
        );
        return report;
    }
    let order = match net.topological_order() {
        Ok(o) => o,
        Err(e) => {
            report.push("cycle", None, e.to_string());
            return report;
        }
    };
    let sigma = |x: NodeId| stages.sigma[x];
    let fanouts = net.fanouts();

    for (u, v, _) in net.edges() {
        // A DFF may share the stage of the asynchronous gate feeding it: its
        // timing reference is the clocked element upstream.
        let shared = net.kind(v) == GateKind::Dff && sfq.category(u) == GateCategory::AA;
        let strict = sfq.category(v) == GateCategory::AS && !shared;
        if sigma(v) < sigma(u) || strict && sigma(v) == sigma(u) {
            report.push(
                "edge-order",
                Some(v),
                format!("{} at stage {} fed by node {u} at stage {}", net.kind(v), sigma(v), sigma(u)),
            );
        }
    }

    for v in 0..net.len() {
        if sfq.category(v) != GateCategory::SA {
            continue;
        }
        for &u in net.fanins(v) {
            let clocked = net.kind(u) == GateKind::Pi || sfq.category(u) == GateCategory::AS;
            if !clocked || sigma(u) != sigma(v) {
                report.push(
                    "sa-predecessor",
                    Some(v),
                    format!(
                        "{} at stage {} fed by {} at stage {}",
                        net.kind(v),
                        sigma(v),
                        net.kind(u),
                        sigma(u)
                    ),
                );
            }
        }
    }

    for &p in net.primary_inputs() {
        if sigma(p).div_euclid(n) != 0 {
            report.push("pi-epoch", Some(p), format!("input at stage {}", sigma(p)));
        }
    }
    let outs = net.primary_outputs();
    if let Some(&first) = outs.first() {
        let e0 = sigma(first).div_euclid(n);
        for &o in outs {
            if sigma(o).div_euclid(n) != e0 {
                report.push(
                    "po-epoch",
                    Some(o),
                    format!("output epoch {} differs from {e0}", sigma(o).div_euclid(n)),
                );
            }
        }
    }

    for (u, fo) in fanouts.iter().enumerate() {
        let ok = match net.kind(u) {
            GateKind::Splitter => fo.len() == 2,
            _ => fo.len() <= 1,
        };
        if !ok {
            report.push("fanout", Some(u), format!("{} drives {} sinks", net.kind(u), fo.len()));
        }
    }

    // Reverse sweep: what each node reaches through asynchronous gates.
    let mut down = vec![Downstream::NONE; net.len()];
    for &u in order.iter().rev() {
        let mut acc = Downstream::NONE;
        for &(w, _) in &fanouts[u] {
            let d = if sfq.category(w) == GateCategory::AA {
                down[w]
            } else {
                let s = Some(sigma(w));
                let strict = matches!(sfq.category(w), GateCategory::AS);
                Downstream {
                    latest: s,
                    strict: if strict { s } else { None },
                    weak: if strict { None } else { s },
                }
            };
            acc = acc.merge(d);
        }
        down[u] = acc;
    }
    for u in 0..net.len() {
        if !clocked_source(net.kind(u), sfq.category(u)) {
            continue;
        }
        let d = down[u];
        if let Some(l) = d.latest {
            if l - sigma(u) > n {
                report.push(
                    "spacing",
                    Some(u),
                    format!("clocked element at stage {} reaches stage {l}, more than {n} later", sigma(u)),
                );
            }
        }
        let early_strict = d.strict.is_some_and(|s| s <= sigma(u));
        let early_weak = d.weak.is_some_and(|s| s < sigma(u));
        if early_strict || early_weak {
            report.push(
                "stage-order",
                Some(u),
                format!("clocked element at stage {} reaches an element that is not later", sigma(u)),
            );
        }
    }
    report
}

/// Checks that explicit epoch/phase annotations agree with the stages.
pub fn check_annotation(ann: &StageAnnotation) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = i64::from(ann.phases);
    if n == 0 {
        report.push("phases", None, "phase count must be positive");
        return report;
    }
    for (id, entry) in ann.entries.iter().enumerate() {
        match entry {
            None => report.push("annotation", Some(id), "missing stage"),
            Some((s, e, p)) => {
                let bad_e = e.is_some_and(|e| e != s.div_euclid(n));
                let bad_p = p.is_some_and(|p| p != s.rem_euclid(n));
                if bad_e || bad_p {
                    report.push(
                        "annotation",
                        Some(id),
                        format!("stage {s} disagrees with epoch {e:?} phase {p:?}"),
                    );
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::Network;

    fn as_chain(gap: i64, n: u32) -> (SfqNetwork, StageAssignment) {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let x = net.add_gate(GateKind::Not, &[a]);
        let y = net.add_gate(GateKind::Not, &[x]);
        net.add_output(y, "o");
        let sfq = SfqNetwork::from_network(net).unwrap();
        (sfq, StageAssignment::new(n, vec![0, 1, 1 + gap, 1 + gap]))
    }

    #[test]
    fn gap_n_is_legal() {
        let (sfq, st) = as_chain(4, 4);
        assert!(verify_timing(&sfq, &st).ok());
    }

    #[test]
    fn gap_n_plus_one_is_spacing() {
        let (sfq, st) = as_chain(5, 4);
        let r = verify_timing(&sfq, &st);
        assert!(r.has_rule("spacing"), "{r}");
    }

    #[test]
    fn dff_restores_spacing() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let x = net.add_gate(GateKind::Not, &[a]);
        let d = net.add_gate(GateKind::Dff, &[x]);
        let y = net.add_gate(GateKind::Not, &[d]);
        net.add_output(y, "o");
        let sfq = SfqNetwork::from_network(net).unwrap();
        let st = StageAssignment::new(4, vec![0, 1, 5, 6, 6]);
        assert!(verify_timing(&sfq, &st).ok());
        let st = StageAssignment::new(4, vec![0, 1, 6, 7, 7]);
        assert!(verify_timing(&sfq, &st).has_rule("spacing"));
    }

    #[test]
    fn sa_fed_by_splitter_is_invalid() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let x = net.add_gate(GateKind::Not, &[a]);
        let s = net.add_gate(GateKind::Splitter, &[x]);
        let g = net.add_gate(GateKind::And, &[s, s]);
        net.add_output(g, "o");
        let sfq = SfqNetwork::from_network(net).unwrap();
        let st = StageAssignment::new(4, vec![0, 2, 3, 3, 3]);
        assert!(verify_timing(&sfq, &st).has_rule("sa-predecessor"));
    }

    #[test]
    fn sa_fed_directly_at_own_stage() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let b = net.add_input("b");
        let x = net.add_gate(GateKind::Not, &[a]);
        let y = net.add_gate(GateKind::Not, &[b]);
        let g = net.add_gate(GateKind::And, &[x, y]);
        net.add_output(g, "o");
        let sfq = SfqNetwork::from_network(net).unwrap();
        let st = StageAssignment::new(4, vec![0, 0, 2, 2, 2, 2]);
        assert!(verify_timing(&sfq, &st).ok());
        let st = StageAssignment::new(4, vec![0, 0, 2, 1, 2, 2]);
        assert!(verify_timing(&sfq, &st).has_rule("sa-predecessor"));
    }

    #[test]
    fn epochs_and_fanout() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let x = net.add_gate(GateKind::Not, &[a]);
        net.add_output(x, "o1");
        net.add_output(a, "o2");
        let sfq = SfqNetwork::from_network(net).unwrap();
        let st = StageAssignment::new(2, vec![2, 3, 3, 5]);
        let r = verify_timing(&sfq, &st);
        assert!(r.has_rule("pi-epoch"));
        assert!(r.has_rule("po-epoch"));
        assert!(r.has_rule("fanout"));
    }

    #[test]
    fn same_stage_through_merger_is_out_of_order() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let b = net.add_input("b");
        let x = net.add_gate(GateKind::Not, &[a]);
        let m = net.add_gate(GateKind::Merger, &[x, b]);
        let y = net.add_gate(GateKind::Not, &[m]);
        net.add_output(y, "o");
        let sfq = SfqNetwork::from_network(net).unwrap();
        let st = StageAssignment::new(4, vec![0, 1, 1, 1, 1, 1]);
        let r = verify_timing(&sfq, &st);
        assert!(r.has_rule("stage-order"));
    }

    #[test]
    fn annotation_consistency() {
        let ann = StageAnnotation {
            phases: 4,
            entries: vec![Some((5, Some(1), Some(1))), Some((6, Some(1), Some(1))), None],
        };
        let r = check_annotation(&ann);
        assert_eq!(r.violations.len(), 2);
    }
}
