//! Fanout legalization with splitter chains placed as late as possible.

use serde::Serialize;

use crate::decompose::SfqNetwork;
use crate::netlist::{GateKind, NodeId};
use crate::phase::StageAssignment;

/// Splitter chain built for one multi-fanout gate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitterChain {
    pub driver: NodeId,
    /// Fanouts `(node, fanin slot)` in chain order `a_0..a_k`.
    pub fanouts: Vec<(NodeId, usize)>,
    /// Splitters `s_0..s_(k-1)`.
    pub splitters: Vec<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SplitterPlan {
    pub chains: Vec<SplitterChain>,
}

impl SplitterPlan {
    pub fn splitter_count(&self) -> usize {
        self.chains.iter().map(|c| c.splitters.len()).sum()
    }
}

/// Latest stage a splitter feeding `a` may take: `σ(a)`, or `σ(a) − 1`
/// when `a` is clocked by its inputs (AS).
fn latest_feed_stage(sfq: &SfqNetwork, stages: &StageAssignment, a: NodeId) -> i64 {
    stages.stage(a) - i64::from(sfq.is_as(a))
}

/// Replaces every fanout > 1 by a chain of splitters. Fanouts are ordered by
/// the latest stage that can feed them, then by stage and node id; splitter
/// `s_i` takes the feed stage of `a_i`. Splitters get new ids after all
/// existing nodes, drivers processed in ascending id order.
pub fn insert_splitter_trees(
    sfq: &SfqNetwork,
    stages: &StageAssignment,
) -> (SfqNetwork, StageAssignment, SplitterPlan) {
    let mut out = sfq.clone();
    let mut sigma = stages.sigma.clone();
    let fanouts = sfq.net.fanouts();
    let mut plan = SplitterPlan::default();
    for (g, fo) in fanouts.iter().enumerate() {
        if fo.len() < 2 {
            continue;
        }
        let mut order = fo.clone();
        order.sort_by_key(|&(a, slot)| (latest_feed_stage(sfq, stages, a), stages.stage(a), a, slot));
        let k = order.len() - 1;
        let mut splitters = Vec::with_capacity(k);
        let mut prev = g;
        for &(a, _) in order.iter().take(k) {
            let s = out.push(GateKind::Splitter, vec![prev]);
            sigma.push(latest_feed_stage(sfq, stages, a));
            splitters.push(s);
            prev = s;
        }
        for (i, &(a, slot)) in order.iter().enumerate() {
            out.net.fanins_mut(a)[slot] = splitters[i.min(k - 1)];
        }
        plan.chains.push(SplitterChain {
            driver: g,
            fanouts: order,
            splitters,
        });
    }
    (out, StageAssignment::new(stages.n, sigma), plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{decompose, OrStyle};
    use crate::netlist::{equivalent, Network};

    #[test]
    fn chain_for_three_fanouts() {
        // g at σ=2 with merger fanouts at stages 3, 3, 5.
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let b = net.add_input("b");
        let g = net.add_gate(GateKind::Not, &[a]);
        let m1 = net.add_gate(GateKind::Merger, &[g, b]);
        let m2 = net.add_gate(GateKind::Merger, &[b, g]);
        let m3 = net.add_gate(GateKind::Merger, &[g, b]);
        let y1 = net.add_output(m1, "y1");
        let y2 = net.add_output(m2, "y2");
        let y3 = net.add_output(m3, "y3");
        let sfq = decompose(&net, OrStyle::Merger).unwrap();
        let mut sigma = vec![0; sfq.len()];
        sigma[g] = 2;
        sigma[m1] = 3;
        sigma[m2] = 3;
        sigma[m3] = 5;
        for y in [y1, y2, y3] {
            sigma[y] = 5;
        }
        let st = StageAssignment::new(4, sigma);
        let (out, st2, plan) = insert_splitter_trees(&sfq, &st);
        let chain = plan.chains.iter().find(|c| c.driver == g).unwrap();
        let [s0, s1] = chain.splitters[..] else { panic!() };
        assert_eq!((st2.stage(s0), st2.stage(s1)), (3, 3));
        assert_eq!(out.net.fanins(s0), &[g]);
        assert_eq!(out.net.fanins(s1), &[s0]);
        assert_eq!(out.net.fanins(m1)[0], s0);
        assert_eq!(out.net.fanins(m2)[1], s1);
        assert_eq!(out.net.fanins(m3)[0], s1);
        assert!(equivalent(&net, &out.net, 0).unwrap());
        for (u, fo) in out.net.fanouts().iter().enumerate() {
            if out.kind(u) == GateKind::Splitter {
                assert_eq!(fo.len(), 2);
            } else {
                assert!(fo.len() <= 1);
            }
        }
    }

    #[test]
    fn single_fanout_unchanged() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let g = net.add_gate(GateKind::Not, &[a]);
        net.add_output(g, "y");
        let sfq = decompose(&net, OrStyle::Merger).unwrap();
        let st = StageAssignment::new(2, vec![0, 1, 1]);
        let (out, st2, plan) = insert_splitter_trees(&sfq, &st);
        assert_eq!(out, sfq);
        assert_eq!(st2, st);
        assert!(plan.chains.is_empty());
    }

    #[test]
    fn wide_gap_left_for_dff_insertion() {
        // g at σ=0 with fanouts at stages 0 (merger) and 4 (merger), n = 4.
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let b = net.add_input("b");
        let m1 = net.add_gate(GateKind::Merger, &[a, b]);
        let m2 = net.add_gate(GateKind::Merger, &[a, m1]);
        net.add_output(m2, "y");
        let sfq = decompose(&net, OrStyle::Merger).unwrap();
        let st = StageAssignment::new(4, vec![0, 0, 0, 4, 4]);
        let (out, st2, plan) = insert_splitter_trees(&sfq, &st);
        assert_eq!(plan.splitter_count(), 1);
        let s = plan.chains[0].splitters[0];
        assert_eq!(st2.stage(s), 0);
        assert_eq!(out.net.fanins(m2)[0], s);
    }

    #[test]
    fn as_fanout_gets_splitter_one_stage_earlier() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let x = net.add_gate(GateKind::Not, &[a]);
        let y = net.add_gate(GateKind::Not, &[a]);
        let m = net.add_gate(GateKind::Merger, &[x, y]);
        net.add_output(m, "o");
        let sfq = decompose(&net, OrStyle::Merger).unwrap();
        let st = StageAssignment::new(2, vec![0, 3, 1, 3, 3]);
        let (_, st2, plan) = insert_splitter_trees(&sfq, &st);
        let chain = &plan.chains[0];
        // y (feed stage 0) comes before x (feed stage 2).
        assert_eq!(chain.fanouts[0].0, y);
        assert_eq!(st2.stage(chain.splitters[0]), 0);
    }
}
