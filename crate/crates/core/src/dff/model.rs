//! DFF-selection model of one independent path.

use std::collections::{BTreeMap, BTreeSet};

use super::{edge_ranges, DffSite, IndependentPath};
use crate::decompose::{SfqNetwork, SpacingMode};
use crate::netlist::NodeId;
use crate::phase::StageAssignment;
use crate::solver::{Literal, VarId};
use crate::Model;

/// Paths with more source-to-sink traversals than this use the
/// traversal-free encoding.
pub const TRAVERSAL_LIMIT: usize = 10_000;

#[derive(Debug, Clone)]
pub struct DffModel {
    pub model: Model,
    /// Selection variable per site, same order as the site list.
    pub site_vars: Vec<VarId>,
    /// Number of traversals, or 0 when the limit was exceeded.
    pub traversals: usize,
    /// Whether the traversal-free encoding was used.
    pub fallback: bool,
    /// `(node, t, var)`: every traversal reaching `node` has a clocked
    /// element at stage ≥ t. Fallback encoding only.
    coverage: Vec<(NodeId, i64, VarId)>,
}

/// Edge adjacency of a path and a topological order of its internal nodes.
struct Region {
    incoming: BTreeMap<NodeId, Vec<usize>>,
    outgoing: BTreeMap<NodeId, Vec<usize>>,
    topo: Vec<NodeId>,
}

impl Region {
    fn new(sfq: &SfqNetwork, path: &IndependentPath) -> Self {
        let mut incoming: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
        let mut outgoing: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
        for (i, e) in path.edges.iter().enumerate() {
            incoming.entry(e.to).or_default().push(i);
            outgoing.entry(e.from).or_default().push(i);
        }
        let mut indeg: BTreeMap<NodeId, usize> = path
            .internal
            .iter()
            .map(|&x| {
                let d = incoming
                    .get(&x)
                    .map_or(0, |es| es.iter().filter(|&&e| sfq.is_aa(path.edges[e].from)).count());
                (x, d)
            })
            .collect();
        let mut ready: BTreeSet<NodeId> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&x, _)| x).collect();
        let mut topo = Vec::with_capacity(path.internal.len());
        while let Some(x) = ready.pop_first() {
            topo.push(x);
            for &e in outgoing.get(&x).into_iter().flatten() {
                let to = path.edges[e].to;
                if let Some(d) = indeg.get_mut(&to) {
                    *d -= 1;
                    if *d == 0 {
                        ready.insert(to);
                    }
                }
            }
        }
        Region {
            incoming,
            outgoing,
            topo,
        }
    }

    fn out_edges(&self, x: NodeId) -> &[usize] {
        self.outgoing.get(&x).map_or(&[], |v| v.as_slice())
    }

    fn in_edges(&self, x: NodeId) -> &[usize] {
        self.incoming.get(&x).map_or(&[], |v| v.as_slice())
    }
}

/// Source-to-sink edge sequences, or `None` beyond `limit`.
fn traversals(sfq: &SfqNetwork, path: &IndependentPath, region: &Region, limit: usize) -> Option<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let starts: Vec<usize> = (0..path.edges.len())
        .filter(|&e| !sfq.is_aa(path.edges[e].from))
        .collect();
    for s in starts {
        let mut stack = vec![vec![s]];
        while let Some(trail) = stack.pop() {
            let last = path.edges[*trail.last().expect("non-empty")];
            if !sfq.is_aa(last.to) {
                if out.len() == limit {
                    return None;
                }
                out.push(trail);
                continue;
            }
            for &e in region.out_edges(last.to).iter().rev() {
                let mut next = trail.clone();
                next.push(e);
                stack.push(next);
            }
        }
    }
    Some(out)
}

/// Largest allowed distance between consecutive clocked elements.
fn window(n: u32, spacing: SpacingMode) -> i64 {
    match spacing {
        SpacingMode::Window => i64::from(n),
        SpacingMode::ChainLiteral => i64::from(n) + 1,
    }
}

/// Builds the selection model: minimize the number of chosen sites such that
/// no traversal holds two at one stage, every traversal has consecutive
/// clocked elements at most `n` stages apart (`n + 1` in chain-literal mode)
/// and forced sites are chosen.
pub fn build_insertion_model(
    sfq: &SfqNetwork,
    stages: &StageAssignment,
    path: &IndependentPath,
    sites: &[DffSite],
    spacing: SpacingMode,
    traversal_limit: usize,
) -> DffModel {
    let w = window(stages.n, spacing);
    let region = Region::new(sfq, path);
    let mut m = Model::new();
    let site_vars: Vec<VarId> = sites
        .iter()
        .map(|s| {
            let e = path.edges[s.edge];
            m.new_bool(format!("d[{},{},{}]@{}", e.from, e.to, e.slot, s.stage))
        })
        .collect();
    let mut by_edge: Vec<Vec<usize>> = vec![Vec::new(); path.edges.len()];
    for (i, s) in sites.iter().enumerate() {
        by_edge[s.edge].push(i);
    }
    for list in &mut by_edge {
        list.sort_by_key(|&i| sites[i].stage);
    }
    for (i, s) in sites.iter().enumerate() {
        if s.forced {
            m.force(Literal::pos(site_vars[i]));
        }
    }
    // An SA sink with no site at its own stage is only legal when a clocked
    // source feeds it directly at that stage.
    for (i, e) in path.edges.iter().enumerate() {
        if !sfq.is_sa(e.to) || sites.iter().any(|s| s.edge == i && s.forced) {
            continue;
        }
        let direct = !sfq.is_aa(e.from) && !sfq.is_sa(e.from) && stages.stage(e.from) == stages.stage(e.to);
        if !direct {
            m.add_clause(Vec::new());
        }
    }
    m.minimize(site_vars.iter().map(|&v| (1, v)).collect());

    let mut dm = DffModel {
        model: m,
        site_vars,
        traversals: 0,
        fallback: false,
        coverage: Vec::new(),
    };
    match traversals(sfq, path, &region, traversal_limit) {
        Some(list) => {
            dm.traversals = list.len();
            add_traversal_constraints(&mut dm, stages, path, sites, &by_edge, &list, w);
        }
        None => {
            dm.fallback = true;
            add_coverage_constraints(&mut dm, sfq, stages, path, sites, &by_edge, &region, w);
        }
    }
    dm
}

fn add_traversal_constraints(
    dm: &mut DffModel,
    stages: &StageAssignment,
    path: &IndependentPath,
    sites: &[DffSite],
    by_edge: &[Vec<usize>],
    list: &[Vec<usize>],
    w: i64,
) {
    let mut groups: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut windows: BTreeSet<Vec<usize>> = BTreeSet::new();
    for trail in list {
        let on: Vec<usize> = trail.iter().flat_map(|&e| by_edge[e].iter().copied()).collect();
        let mut k = 0;
        while k < on.len() {
            let mut j = k + 1;
            while j < on.len() && sites[on[j]].stage == sites[on[k]].stage {
                j += 1;
            }
            if j - k > 1 {
                let mut g = on[k..j].to_vec();
                g.sort_unstable();
                groups.insert(g);
            }
            k = j;
        }
        let first = path.edges[trail[0]].from;
        let last = path.edges[*trail.last().expect("non-empty")].to;
        let (s, t) = (stages.stage(first), stages.stage(last));
        let mut lo = 0;
        for a in (s + 1)..=(t - w) {
            while lo < on.len() && sites[on[lo]].stage < a {
                lo += 1;
            }
            let mut hi = lo;
            while hi < on.len() && sites[on[hi]].stage <= a + w - 1 {
                hi += 1;
            }
            let mut c = on[lo..hi].to_vec();
            c.sort_unstable();
            windows.insert(c);
        }
    }
    for g in groups {
        dm.model.add_le(g.iter().map(|&i| (1, dm.site_vars[i])).collect(), 1);
    }
    for c in windows {
        dm.model
            .add_clause(c.iter().map(|&i| Literal::pos(dm.site_vars[i])).collect());
    }
}

/// Traversal-free encoding. `C(x, t)` holds when every traversal reaching
/// internal node `x` carries a clocked element at stage ≥ t; each chosen
/// site and each sink then needs coverage at its own stage minus `w` from
/// the edge it sits on. Same-stage sites on one traversal are excluded
/// pairwise along edge reachability.
#[allow(clippy::too_many_arguments)]
fn add_coverage_constraints(
    dm: &mut DffModel,
    sfq: &SfqNetwork,
    stages: &StageAssignment,
    path: &IndependentPath,
    sites: &[DffSite],
    by_edge: &[Vec<usize>],
    region: &Region,
    w: i64,
) {
    // Earliest source stage reaching each internal node.
    let mut earliest: BTreeMap<NodeId, i64> = BTreeMap::new();
    for &x in &region.topo {
        let e = region
            .in_edges(x)
            .iter()
            .map(|&e| {
                let f = path.edges[e].from;
                if sfq.is_aa(f) {
                    earliest[&f]
                } else {
                    stages.stage(f)
                }
            })
            .min()
            .unwrap_or(i64::MAX);
        earliest.insert(x, e);
    }
    let mut cover: BTreeMap<(NodeId, i64), VarId> = BTreeMap::new();
    for &x in &region.topo {
        for t in (earliest[&x] + 1)..=stages.stage(x) {
            let v = dm.model.new_bool(format!("c[{x}]@{t}"));
            cover.insert((x, t), v);
            dm.coverage.push((x, t, v));
        }
    }
    // Literal for "every traversal up to `node` has a clocked element at
    // stage ≥ t": Ok(true/false) when constant.
    let upto = |node: NodeId, t: i64| -> Result<bool, VarId> {
        if !sfq.is_aa(node) {
            return Ok(stages.stage(node) >= t);
        }
        if t <= earliest[&node] {
            return Ok(true);
        }
        match cover.get(&(node, t)) {
            Some(&v) => Err(v),
            None => Ok(false),
        }
    };
    // Clause "prefix lit ∨ sites on edge e with stage in [from, below)".
    let requirement = |e: usize, from: i64, below: i64| -> Option<Vec<Literal>> {
        let mut lits = Vec::new();
        match upto(path.edges[e].from, from) {
            Ok(true) => return None,
            Ok(false) => {}
            Err(v) => lits.push(Literal::pos(v)),
        }
        for &i in &by_edge[e] {
            if sites[i].stage >= from && sites[i].stage < below {
                lits.push(Literal::pos(dm.site_vars[i]));
            }
        }
        Some(lits)
    };
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    for (&(x, t), &v) in &cover {
        for &e in region.in_edges(x) {
            if let Some(mut c) = requirement(e, t, i64::MAX) {
                c.push(Literal::neg(v));
                clauses.push(c);
            }
        }
    }
    for (i, s) in sites.iter().enumerate() {
        if let Some(mut c) = requirement(s.edge, s.stage - w, s.stage) {
            c.push(Literal::neg(dm.site_vars[i]));
            clauses.push(c);
        }
    }
    for (e, edge) in path.edges.iter().enumerate() {
        if !sfq.is_aa(edge.to) {
            let t = stages.stage(edge.to);
            if let Some(c) = requirement(e, t - w, i64::MAX) {
                clauses.push(c);
            }
        }
    }
    // Edges reachable from each edge, for same-stage exclusion.
    let mut after: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); path.edges.len()];
    for &x in region.topo.iter().rev() {
        let mut below = BTreeSet::new();
        for &o in region.out_edges(x) {
            below.insert(o);
            below.extend(after[o].iter().copied());
        }
        for &e in region.in_edges(x) {
            after[e] = below.clone();
        }
    }
    let mut by_stage: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, s) in sites.iter().enumerate() {
        by_stage.entry(s.stage).or_default().push(i);
    }
    for list in by_stage.values() {
        for (k, &a) in list.iter().enumerate() {
            for &b in &list[k + 1..] {
                let (ea, eb) = (sites[a].edge, sites[b].edge);
                if after[ea].contains(&eb) || after[eb].contains(&ea) {
                    clauses.push(vec![Literal::neg(dm.site_vars[a]), Literal::neg(dm.site_vars[b])]);
                }
            }
        }
    }
    for c in clauses {
        dm.model.add_clause(c);
    }
}

/// The always-valid selection taking, at every stage, the last site of each
/// traversal: a site is chosen unless an edge leaving its head also admits
/// its stage.
pub fn last_site_selection(sfq: &SfqNetwork, stages: &StageAssignment, path: &IndependentPath, sites: &[DffSite]) -> Vec<bool> {
    let ranges = edge_ranges(sfq, stages, path);
    let region = Region::new(sfq, path);
    sites
        .iter()
        .map(|s| {
            let head = path.edges[s.edge].to;
            !sfq.is_aa(head)
                || region.out_edges(head).iter().all(|&o| {
                    let (lo, hi) = ranges.ranges[o];
                    s.stage < lo || s.stage > hi
                })
        })
        .collect()
}

impl DffModel {
    /// Full assignment for the last-site selection.
    pub fn hint(&self, sfq: &SfqNetwork, stages: &StageAssignment, path: &IndependentPath, sites: &[DffSite]) -> Vec<i64> {
        let pick = last_site_selection(sfq, stages, path, sites);
        let mut values = vec![0i64; self.model.num_vars()];
        for (v, &p) in self.site_vars.iter().zip(&pick) {
            values[v.index()] = i64::from(p);
        }
        if self.fallback {
            let region = Region::new(sfq, path);
            // Latest clocked stage guaranteed on every traversal into a node.
            let mut latest: BTreeMap<NodeId, i64> = BTreeMap::new();
            for &x in &region.topo {
                let l = region
                    .in_edges(x)
                    .iter()
                    .map(|&e| {
                        let f = path.edges[e].from;
                        let base = if sfq.is_aa(f) { latest[&f] } else { stages.stage(f) };
                        sites
                            .iter()
                            .zip(&pick)
                            .filter(|(s, &p)| p && s.edge == e)
                            .map(|(s, _)| s.stage)
                            .fold(base, i64::max)
                    })
                    .min()
                    .unwrap_or(i64::MIN);
                latest.insert(x, l);
            }
            for &(x, t, v) in &self.coverage {
                values[v.index()] = i64::from(latest[&x] >= t);
            }
        }
        values
    }
}
