//! Stage assignment: bounds, the phase-assignment model and its solve.
//!
//! Every node gets a stage `σ = n·S + φ` (epoch `S`, phase `φ`). Constraints:
//!
//! * `σ(i) < σ(j)` on edges into AS gates, `σ(i) ≤ σ(j)` on all other edges
//!   (POs included, so an output may sit later than its driver);
//! * an SA gate sits strictly after any fanin that does not directly drive
//!   it from a clocked element (see [`direct_clocked_fanin`]);
//! * PIs in epoch 0, all POs in one common epoch.
//!
//! The objective counts DFFs approximately with floor terms `⌊D/n⌋`, each
//! linearized by an integer `b` with `n·b ≤ D ≤ n·b + n − 1`.

use serde::Serialize;
use thiserror::Error;

use crate::decompose::{GateCategory, MappingConfig, ObjectiveMode, SfqNetwork};
use crate::netlist::{GateKind, NetlistError, NodeId, ValidationReport};
use crate::solver::{
    solve_with_hint, ModelError, SolveStats, SolveStatus, SolverBudget, VarId,
};
use crate::Model;

/// Stage of every node for a given phase count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageAssignment {
    pub n: u32,
    pub sigma: Vec<i64>,
}

impl StageAssignment {
    pub fn new(n: u32, sigma: Vec<i64>) -> Self {
        StageAssignment { n, sigma }
    }

    pub fn stage(&self, id: NodeId) -> i64 {
        self.sigma[id]
    }

    pub fn epoch(&self, id: NodeId) -> i64 {
        self.sigma[id].div_euclid(i64::from(self.n))
    }

    pub fn phase(&self, id: NodeId) -> i64 {
        self.sigma[id].rem_euclid(i64::from(self.n))
    }

    /// Common PO epoch, or 0 without outputs.
    pub fn output_epoch(&self, sfq: &SfqNetwork) -> i64 {
        sfq.net
            .primary_outputs()
            .iter()
            .map(|&o| self.epoch(o))
            .max()
            .unwrap_or(0)
    }

    /// Checks the phase-assignment constraints on a network without
    /// splitters (before fanout legalization).
    pub fn check(&self, sfq: &SfqNetwork) -> ValidationReport {
        let mut report = ValidationReport::default();
        let fanouts = sfq.net.fanouts();
        let n = i64::from(self.n);
        for (u, v, _) in sfq.net.edges() {
            let strict = sfq.is_as(v)
                || (sfq.is_sa(v) && !direct_clocked_fanin(sfq, &fanouts, u));
            let ok = if strict {
                self.sigma[u] < self.sigma[v]
            } else {
                self.sigma[u] <= self.sigma[v]
            };
            if !ok {
                report.push(
                    "edge-order",
                    Some(v),
                    format!("stage {} after fanin {} at stage {}", self.sigma[v], u, self.sigma[u]),
                );
            }
        }
        for &i in sfq.net.primary_inputs() {
            if !(0..n).contains(&self.sigma[i]) {
                report.push("pi-epoch", Some(i), format!("PI at stage {}", self.sigma[i]));
            }
        }
        let outs = sfq.net.primary_outputs();
        if let Some(&first) = outs.first() {
            for &o in outs {
                if self.epoch(o) != self.epoch(first) {
                    report.push("po-epoch", Some(o), format!("PO epoch {} differs", self.epoch(o)));
                }
            }
        }
        report
    }
}

/// Whether `a` can drive an SA gate at the SA gate's own stage: it must be
/// a clocked element (AS gate or PI) with no other fanout, since any other
/// fanout puts a splitter between the two.
pub fn direct_clocked_fanin(sfq: &SfqNetwork, fanouts: &[Vec<(NodeId, usize)>], a: NodeId) -> bool {
    (sfq.is_as(a) || sfq.kind(a) == GateKind::Pi) && fanouts[a].len() == 1
}

/// Minimum stage increment from fanin `a` to gate `g`.
fn edge_gap(sfq: &SfqNetwork, fanouts: &[Vec<(NodeId, usize)>], a: NodeId, g: NodeId) -> i64 {
    match sfq.category(g) {
        GateCategory::AS => 1,
        GateCategory::SA => i64::from(!direct_clocked_fanin(sfq, fanouts, a)),
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageBounds {
    pub asap: Vec<i64>,
    pub alap: Vec<i64>,
    /// Largest admissible stage.
    pub sigma_max: i64,
    /// Most AS plus SA gates on any path.
    pub clocked_depth: i64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhaseError {
    #[error("empty stage range at node {0}")]
    InfeasibleBounds(NodeId),
    #[error("phase-assignment model is infeasible")]
    Infeasible,
    #[error("no phase assignment found within the solver budget")]
    NoSolution,
    #[error("phase count must be at least 1")]
    ZeroPhases,
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn build_stage_bounds(sfq: &SfqNetwork, n: u32) -> Result<StageBounds, PhaseError> {
    if n == 0 {
        return Err(PhaseError::ZeroPhases);
    }
    let n = i64::from(n);
    let order = sfq.net.topological_order()?;
    let fanouts = sfq.net.fanouts();
    let mut depth = vec![0i64; sfq.len()];
    let mut asap = vec![0i64; sfq.len()];
    for &v in &order {
        let own = i64::from(matches!(sfq.category(v), GateCategory::AS | GateCategory::SA));
        let mut d = 0;
        let mut s = 0;
        for &a in sfq.net.fanins(v) {
            d = d.max(depth[a]);
            s = s.max(asap[a] + edge_gap(sfq, &fanouts, a, v));
        }
        depth[v] = d + own;
        asap[v] = s;
    }
    let clocked_depth = depth.iter().copied().max().unwrap_or(0);
    let sigma_max = n * (clocked_depth + 1) - 1;
    let mut alap = vec![sigma_max; sfq.len()];
    for &v in order.iter().rev() {
        let mut s = if sfq.kind(v) == GateKind::Pi { n - 1 } else { sigma_max };
        for &(j, _) in &fanouts[v] {
            s = s.min(alap[j] - edge_gap(sfq, &fanouts, v, j));
        }
        alap[v] = s;
    }
    if let Some(v) = (0..sfq.len()).find(|&v| asap[v] > alap[v]) {
        return Err(PhaseError::InfeasibleBounds(v));
    }
    Ok(StageBounds {
        asap,
        alap,
        sigma_max,
        clocked_depth,
    })
}

/// One floor term of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TermSource {
    /// Edge `(from, to)`.
    Edge(NodeId, NodeId),
    /// Gate `g` with its latest fanout.
    Gate(NodeId),
}

#[derive(Debug, Clone)]
pub struct PhaseModel {
    pub model: Model,
    pub n: u32,
    pub mode: ObjectiveMode,
    pub sigma: Vec<VarId>,
    pub epoch_out: Option<VarId>,
    /// Latest-fanout variable per gate (gate-max mode).
    pub latest: Vec<Option<VarId>>,
    pub terms: Vec<(TermSource, VarId)>,
}

/// Numerator of the edge term for `(i, j)`: `σ(j) − σ(i) + [j ∈ SA]`.
fn sa_bonus(sfq: &SfqNetwork, j: NodeId) -> i64 {
    i64::from(sfq.is_sa(j))
}

pub fn build_phase_model(
    sfq: &SfqNetwork,
    n: u32,
    mode: ObjectiveMode,
    bounds: &StageBounds,
) -> Result<PhaseModel, PhaseError> {
    if n == 0 {
        return Err(PhaseError::ZeroPhases);
    }
    if let Some(v) = (0..sfq.len()).find(|&v| bounds.asap[v] > bounds.alap[v]) {
        return Err(PhaseError::InfeasibleBounds(v));
    }
    let nn = i64::from(n);
    let order = sfq.net.topological_order()?;
    let fanouts = sfq.net.fanouts();
    let mut m = Model::new();
    let outs = sfq.net.primary_outputs();
    let epoch_out = (!outs.is_empty()).then(|| m.new_int("E_out", 0, bounds.sigma_max / nn));
    let mut sigma = vec![VarId(usize::MAX); sfq.len()];
    for &v in &order {
        sigma[v] = m.new_int(format!("sigma[{v}]"), bounds.asap[v], bounds.alap[v]);
    }
    for (u, v, _) in sfq.net.edges() {
        let gap = edge_gap(sfq, &fanouts, u, v);
        // σ(v) − σ(u) ≥ gap
        m.add_ge(vec![(1, sigma[v]), (-1, sigma[u])], gap);
    }
    if let Some(e) = epoch_out {
        for &o in outs {
            m.add_le(vec![(nn, e), (-1, sigma[o])], 0);
            m.add_le(vec![(1, sigma[o]), (-nn, e)], nn - 1);
        }
    }
    let b_max = (bounds.sigma_max + 1) / nn + 1;
    let mut latest = vec![None; sfq.len()];
    let mut terms = Vec::new();
    let mut floor_term = |m: &mut Model, src: TermSource, numerator: Vec<(i64, VarId)>, offset: i64| {
        let name = match src {
            TermSource::Edge(i, j) => format!("b[{i},{j}]"),
            TermSource::Gate(g) => format!("b[{g}]"),
        };
        let b = m.new_int(name, 0, b_max);
        // n·b ≤ D and D ≤ n·b + n − 1, with D = numerator + offset.
        let mut lo = numerator.clone();
        lo.push((-nn, b));
        m.add_ge(lo, -offset);
        let mut hi = numerator;
        hi.push((-nn, b));
        m.add_le(hi, nn - 1 - offset);
        terms.push((src, b));
    };
    match mode {
        ObjectiveMode::Edge => {
            let edges: Vec<_> = sfq.net.edges().collect();
            for (i, j, _) in edges {
                floor_term(
                    &mut m,
                    TermSource::Edge(i, j),
                    vec![(1, sigma[j]), (-1, sigma[i])],
                    sa_bonus(sfq, j),
                );
            }
        }
        ObjectiveMode::GateMax => {
            for &g in &order {
                if fanouts[g].is_empty() {
                    continue;
                }
                let hi = fanouts[g]
                    .iter()
                    .map(|&(a, _)| bounds.alap[a] + sa_bonus(sfq, a))
                    .max()
                    .expect("non-empty fanout");
                let lo = fanouts[g]
                    .iter()
                    .map(|&(a, _)| bounds.asap[a] + sa_bonus(sfq, a))
                    .max()
                    .expect("non-empty fanout");
                let mg = m.new_int(format!("m[{g}]"), lo, hi);
                for &(a, _) in &fanouts[g] {
                    m.add_ge(vec![(1, mg), (-1, sigma[a])], sa_bonus(sfq, a));
                }
                latest[g] = Some(mg);
            }
            for &g in &order {
                if let Some(mg) = latest[g] {
                    floor_term(&mut m, TermSource::Gate(g), vec![(1, mg), (-1, sigma[g])], 0);
                }
            }
        }
    }
    m.minimize(terms.iter().map(|&(_, b)| (1, b)).collect());
    Ok(PhaseModel {
        model: m,
        n,
        mode,
        sigma,
        epoch_out,
        latest,
        terms,
    })
}

impl PhaseModel {
    /// Completes a stage vector into a full model assignment.
    pub fn complete(&self, sfq: &SfqNetwork, stages: &[i64]) -> Vec<i64> {
        let nn = i64::from(self.n);
        let mut values = vec![0i64; self.model.num_vars()];
        for (v, &var) in self.sigma.iter().enumerate() {
            values[var.index()] = stages[v];
        }
        if let Some(e) = self.epoch_out {
            let o = sfq.net.primary_outputs()[0];
            values[e.index()] = stages[o].div_euclid(nn);
        }
        let fanouts = sfq.net.fanouts();
        for (g, mg) in self.latest.iter().enumerate() {
            if let Some(mg) = mg {
                values[mg.index()] = fanouts[g]
                    .iter()
                    .map(|&(a, _)| stages[a] + sa_bonus(sfq, a))
                    .max()
                    .expect("non-empty fanout");
            }
        }
        for &(src, b) in &self.terms {
            let d = match src {
                TermSource::Edge(i, j) => stages[j] - stages[i] + sa_bonus(sfq, j),
                TermSource::Gate(g) => values[self.latest[g].expect("gate term").index()] - stages[g],
            };
            values[b.index()] = d.div_euclid(nn);
        }
        values
    }

    pub fn stages(&self, values: &[i64]) -> Vec<i64> {
        self.sigma.iter().map(|v| values[v.index()]).collect()
    }
}

/// Objective value recomputed directly from stages.
pub fn objective_from_stages(sfq: &SfqNetwork, n: u32, mode: ObjectiveMode, stages: &[i64]) -> i64 {
    let nn = i64::from(n);
    match mode {
        ObjectiveMode::Edge => sfq
            .net
            .edges()
            .map(|(i, j, _)| (stages[j] - stages[i] + sa_bonus(sfq, j)).div_euclid(nn))
            .sum(),
        ObjectiveMode::GateMax => {
            let fanouts = sfq.net.fanouts();
            (0..sfq.len())
                .filter(|&g| !fanouts[g].is_empty())
                .map(|g| {
                    let top = fanouts[g]
                        .iter()
                        .map(|&(a, _)| stages[a] + sa_bonus(sfq, a))
                        .max()
                        .expect("non-empty fanout");
                    (top - stages[g]).div_euclid(nn)
                })
                .sum()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseResult {
    pub stages: StageAssignment,
    pub status: SolveStatus,
    pub objective: i64,
    pub stats: SolveStats,
}

/// Builds and solves the phase-assignment model for `cfg.n` phases.
pub fn assign_stages(sfq: &SfqNetwork, cfg: &MappingConfig) -> Result<PhaseResult, PhaseError> {
    let bounds = build_stage_bounds(sfq, cfg.n)?;
    let pm = build_phase_model(sfq, cfg.n, cfg.objective, &bounds)?;
    solve_phase_model(sfq, &pm, &bounds, cfg.phase_budget)
}

/// Solves a built phase model, seeding the search with a local-search
/// assignment.
pub fn solve_phase_model(
    sfq: &SfqNetwork,
    pm: &PhaseModel,
    bounds: &StageBounds,
    budget: SolverBudget,
) -> Result<PhaseResult, PhaseError> {
    let start = improve_stages(sfq, pm.n, pm.mode, bounds);
    let hint = pm.complete(sfq, &start);
    let sol = solve_with_hint(&pm.model, budget, Some(&hint))?;
    match sol.status {
        SolveStatus::Infeasible => Err(PhaseError::Infeasible),
        SolveStatus::TimeoutNoSolution => Err(PhaseError::NoSolution),
        status => Ok(PhaseResult {
            stages: StageAssignment::new(pm.n, pm.stages(&sol.values)),
            status,
            objective: sol.objective,
            stats: sol.stats,
        }),
    }
}

/// Earliest feasible stages, with all POs moved into the latest of their
/// earliest epochs.
pub fn earliest_stages(sfq: &SfqNetwork, n: u32, bounds: &StageBounds) -> Vec<i64> {
    let nn = i64::from(n);
    let mut s = bounds.asap.clone();
    let outs = sfq.net.primary_outputs();
    let epoch = outs.iter().map(|&o| s[o].div_euclid(nn)).max().unwrap_or(0);
    for &o in outs {
        s[o] = s[o].max(nn * epoch);
    }
    s
}

/// Coordinate descent on the stage vector: each node moves to the cheapest
/// stage its neighbours allow, alternating late-biased reverse-topological
/// sweeps with early-biased topological sweeps. Returns the best vector seen.
pub fn improve_stages(sfq: &SfqNetwork, n: u32, mode: ObjectiveMode, bounds: &StageBounds) -> Vec<i64> {
    let nn = i64::from(n);
    let order = match sfq.net.topological_order() {
        Ok(o) => o,
        Err(_) => return bounds.asap.clone(),
    };
    let fanouts = sfq.net.fanouts();
    let mut s = earliest_stages(sfq, n, bounds);
    let outs = sfq.net.primary_outputs();
    let out_epoch = outs.first().map(|&o| s[o].div_euclid(nn));
    let mut best_cost = objective_from_stages(sfq, n, mode, &s);
    let mut best = s.clone();

    let gate_term = |s: &[i64], g: NodeId| -> i64 {
        fanouts[g]
            .iter()
            .map(|&(a, _)| s[a] + sa_bonus(sfq, a))
            .max()
            .map_or(0, |top| (top - s[g]).div_euclid(nn))
    };
    let local_cost = |s: &[i64], v: NodeId| -> i64 {
        match mode {
            ObjectiveMode::GateMax => {
                let mut c = gate_term(s, v);
                let fi = sfq.net.fanins(v);
                for (k, &i) in fi.iter().enumerate() {
                    if !fi[..k].contains(&i) {
                        c += gate_term(s, i);
                    }
                }
                c
            }
            ObjectiveMode::Edge => {
                let mut c = 0;
                for &i in sfq.net.fanins(v) {
                    c += (s[v] - s[i] + sa_bonus(sfq, v)).div_euclid(nn);
                }
                for &(j, _) in &fanouts[v] {
                    c += (s[j] - s[v] + sa_bonus(sfq, j)).div_euclid(nn);
                }
                c
            }
        }
    };

    for round in 0..40 {
        let late = round % 2 == 0;
        let sweep: Vec<NodeId> = if late {
            order.iter().rev().copied().collect()
        } else {
            order.clone()
        };
        for v in sweep {
            let mut lo = bounds.asap[v];
            let mut hi = bounds.alap[v];
            for &i in sfq.net.fanins(v) {
                lo = lo.max(s[i] + edge_gap(sfq, &fanouts, i, v));
            }
            for &(j, _) in &fanouts[v] {
                hi = hi.min(s[j] - edge_gap(sfq, &fanouts, v, j));
            }
            if sfq.kind(v) == GateKind::Po {
                let e = out_epoch.expect("outputs exist");
                lo = lo.max(nn * e);
                hi = hi.min(nn * e + nn - 1);
            }
            if lo >= hi {
                continue;
            }
            let current = s[v];
            let mut pick = current;
            let mut pick_cost = local_cost(&s, v);
            for x in lo..=hi {
                s[v] = x;
                let c = local_cost(&s, v);
                let better = c < pick_cost || (c == pick_cost && if late { x > pick } else { x < pick });
                if better {
                    pick = x;
                    pick_cost = c;
                }
            }
            s[v] = pick;
        }
        let cost = objective_from_stages(sfq, n, mode, &s);
        if cost < best_cost {
            best_cost = cost;
            best = s.clone();
        } else if !late && round > 1 {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{decompose, OrStyle};
    use crate::netlist::Network;
    use crate::solver::{verify_solution, SolverBudget};

    fn sfq(net: Network) -> SfqNetwork {
        decompose(&net, OrStyle::Merger).unwrap()
    }

    fn cfg(n: u32, mode: ObjectiveMode) -> MappingConfig {
        let mut c = MappingConfig::new(n);
        c.objective = mode;
        c.phase_budget = SolverBudget::unlimited();
        c
    }

    #[test]
    fn as_chain_bounds() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let g1 = net.add_gate(GateKind::Not, &[a]);
        let g2 = net.add_gate(GateKind::Not, &[g1]);
        net.add_output(g2, "y");
        let b = build_stage_bounds(&sfq(net), 2).unwrap();
        assert_eq!(b.asap[g1], 1);
        assert_eq!(b.asap[g2], 2);
        assert_eq!(b.clocked_depth, 2);
        assert_eq!(b.sigma_max, 5);
        assert_eq!(b.alap[a], 1);
    }

    #[test]
    fn merger_from_pi_is_stage_zero() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let b = net.add_input("b");
        let m = net.add_gate(GateKind::Merger, &[a, b]);
        net.add_output(m, "y");
        let bounds = build_stage_bounds(&sfq(net), 4).unwrap();
        assert_eq!(bounds.asap[m], 0);
    }

    #[test]
    fn sa_after_shared_fanin_is_one_later() {
        // a feeds both an AND and a NOT, so a splitter will sit before the AND.
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let b = net.add_input("b");
        let g = net.add_gate(GateKind::And, &[a, b]);
        let h = net.add_gate(GateKind::Not, &[a]);
        net.add_output(g, "y");
        net.add_output(h, "z");
        let bounds = build_stage_bounds(&sfq(net), 4).unwrap();
        assert_eq!(bounds.asap[g], 1);
    }

    #[test]
    fn floor_linearization_forces_b() {
        // σ(i)=1, σ(j)=6, j not SA, n=2 → b = 2.
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let i = net.add_gate(GateKind::Not, &[a]);
        let j = net.add_gate(GateKind::Merger, &[i, i]);
        net.add_output(j, "y");
        let s = sfq(net);
        let bounds = build_stage_bounds(&s, 2).unwrap();
        let pm = build_phase_model(&s, 2, ObjectiveMode::Edge, &bounds).unwrap();
        let stages = vec![0, 1, 6, 6];
        let values = pm.complete(&s, &stages);
        let b = pm
            .terms
            .iter()
            .find(|(src, _)| *src == TermSource::Edge(i, j))
            .unwrap()
            .1;
        assert_eq!(values[b.index()], 2);
        // Any other value of b violates the linearization.
        let mut wrong = values.clone();
        wrong[b.index()] = 1;
        assert!(!verify_solution(&pm.model, &wrong).unwrap());
        wrong[b.index()] = 3;
        assert!(!verify_solution(&pm.model, &wrong).unwrap());
    }

    #[test]
    fn sa_same_stage_term_is_zero() {
        // (6 - 6 + 1) / 4 → 0
        assert_eq!((6i64 - 6 + 1).div_euclid(4), 0);
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let b = net.add_input("b");
        let x = net.add_gate(GateKind::Not, &[a]);
        let y = net.add_gate(GateKind::Not, &[b]);
        let g = net.add_gate(GateKind::And, &[x, y]);
        net.add_output(g, "o");
        let s = sfq(net);
        let stages = vec![0, 0, 1, 1, 1, 1];
        assert_eq!(objective_from_stages(&s, 4, ObjectiveMode::Edge, &stages), 0);
    }

    #[test]
    fn not_gate_objective() {
        for n in 1..=4 {
            let mut net = Network::new("t");
            let a = net.add_input("a");
            let g = net.add_gate(GateKind::Not, &[a]);
            let y = net.add_output(g, "y");
            let s = sfq(net);
            let r = assign_stages(&s, &cfg(n, ObjectiveMode::GateMax)).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal);
            // The PI -> NOT gap of one stage costs floor(1/n).
            assert_eq!(r.objective, i64::from(n == 1));
            assert_eq!(r.stages.stage(g), 1);
            assert_eq!(r.stages.epoch(y), 1 / i64::from(n));
            assert!(r.stages.check(&s).ok());
        }
    }

    #[test]
    fn output_epochs_are_equalized() {
        // Outputs behind chains of 3 and 1 NOT gates, n = 2.
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let b = net.add_input("b");
        let x1 = net.add_gate(GateKind::Not, &[a]);
        let x2 = net.add_gate(GateKind::Not, &[x1]);
        let x3 = net.add_gate(GateKind::Not, &[x2]);
        let y1 = net.add_gate(GateKind::Not, &[b]);
        let px = net.add_output(x3, "x");
        let py = net.add_output(y1, "y");
        let s = sfq(net);
        for mode in [ObjectiveMode::Edge, ObjectiveMode::GateMax] {
            let r = assign_stages(&s, &cfg(2, mode)).unwrap();
            assert!(r.stages.check(&s).ok(), "{}", r.stages.check(&s));
            assert_eq!(r.stages.epoch(px), r.stages.epoch(py));
            assert_eq!(r.objective, objective_from_stages(&s, 2, mode, &r.stages.sigma));
        }
    }

    #[test]
    fn pass_through_output_is_feasible() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let g1 = net.add_gate(GateKind::Not, &[a]);
        let g2 = net.add_gate(GateKind::Not, &[g1]);
        let g3 = net.add_gate(GateKind::Not, &[g2]);
        net.add_output(a, "p");
        net.add_output(g3, "q");
        let s = sfq(net);
        let r = assign_stages(&s, &cfg(1, ObjectiveMode::GateMax)).unwrap();
        assert!(r.stages.check(&s).ok());
    }

    #[test]
    fn improve_stages_is_feasible() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let b = net.add_input("b");
        let x = net.add_gate(GateKind::Not, &[a]);
        let y = net.add_gate(GateKind::Xor, &[x, b]);
        let z = net.add_gate(GateKind::And, &[y, a]);
        let w = net.add_gate(GateKind::Merger, &[z, x]);
        net.add_output(w, "o");
        net.add_output(b, "p");
        let s = sfq(net);
        for n in 1..=4 {
            for mode in [ObjectiveMode::Edge, ObjectiveMode::GateMax] {
                let bounds = build_stage_bounds(&s, n).unwrap();
                let st = improve_stages(&s, n, mode, &bounds);
                assert!(StageAssignment::new(n, st.clone()).check(&s).ok());
                let pm = build_phase_model(&s, n, mode, &bounds).unwrap();
                assert!(verify_solution(&pm.model, &pm.complete(&s, &st)).unwrap());
            }
        }
    }
}
