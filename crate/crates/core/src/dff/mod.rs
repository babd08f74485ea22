//! Path-balancing DFF insertion.
//!
//! The network is cut into independent paths: each maximal connected region
//! of asynchronous (AA) gates together with the clocked gates around it, plus
//! one trivial path for every direct edge between two clocked nodes. Each
//! path gets candidate DFF sites (edge, stage) and a small model choosing the
//! fewest sites such that along every source-to-sink traversal consecutive
//! clocked elements are at most `n` stages apart, no two share a stage, and
//! SA sinks are fed by a DFF at their own stage.

mod model;
mod oracle;

use std::collections::BTreeMap;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::decompose::{MappingConfig, SfqNetwork, SpacingMode};
use crate::netlist::{GateKind, NodeId};
use crate::phase::StageAssignment;
use crate::solver::{solve_with_hint, ModelError, SolveStatus, SolverBudget};

pub use model::{build_insertion_model, last_site_selection, DffModel, TRAVERSAL_LIMIT};
pub use oracle::{brute_force_min_dffs, OracleError, ORACLE_SITE_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PathEdge {
    pub from: NodeId,
    pub to: NodeId,
    /// Fanin slot of `to`.
    pub slot: usize,
}

/// An asynchronous region with its clocked boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndependentPath {
    /// Clocked nodes driving the region (PI, AS, SA).
    pub sources: Vec<NodeId>,
    /// AA gates of the region; empty for a direct edge.
    pub internal: Vec<NodeId>,
    /// Clocked nodes fed by the region (AS, SA, PO).
    pub sinks: Vec<NodeId>,
    /// Every edge with an endpoint in `internal`, or the single direct edge.
    pub edges: Vec<PathEdge>,
}

impl IndependentPath {
    fn min_node(&self) -> NodeId {
        self.sources
            .iter()
            .chain(&self.internal)
            .chain(&self.sinks)
            .copied()
            .min()
            .unwrap_or(usize::MAX)
    }
}

/// Candidate DFF location: a stage on one path edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DffSite {
    /// Index into [`IndependentPath::edges`].
    pub edge: usize,
    pub stage: i64,
    /// Required: the DFF feeding an SA gate at its own stage.
    pub forced: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DffError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

/// Splits the network into independent paths, ordered by smallest contained
/// node id and then by first edge.
pub fn extract_paths(sfq: &SfqNetwork) -> Vec<IndependentPath> {
    let len = sfq.len();
    // Union-find over AA nodes joined by AA-AA edges.
    let mut parent: Vec<usize> = (0..len).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (u, v, _) in sfq.net.edges() {
        if sfq.is_aa(u) && sfq.is_aa(v) {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut regions: BTreeMap<usize, IndependentPath> = BTreeMap::new();
    let mut direct = Vec::new();
    for (u, v, slot) in sfq.net.edges() {
        let e = PathEdge { from: u, to: v, slot };
        let owner = if sfq.is_aa(v) {
            Some(v)
        } else if sfq.is_aa(u) {
            Some(u)
        } else {
            None
        };
        match owner {
            None => direct.push(IndependentPath {
                sources: vec![u],
                internal: Vec::new(),
                sinks: vec![v],
                edges: vec![e],
            }),
            Some(x) => {
                let root = find(&mut parent, x);
                let p = regions.entry(root).or_insert_with(|| IndependentPath {
                    sources: Vec::new(),
                    internal: Vec::new(),
                    sinks: Vec::new(),
                    edges: Vec::new(),
                });
                p.edges.push(e);
                if !sfq.is_aa(u) {
                    p.sources.push(u);
                }
                if !sfq.is_aa(v) {
                    p.sinks.push(v);
                }
            }
        }
    }
    for v in 0..len {
        if sfq.is_aa(v) {
            let root = find(&mut parent, v);
            regions
                .entry(root)
                .or_insert_with(|| IndependentPath {
                    sources: Vec::new(),
                    internal: Vec::new(),
                    sinks: Vec::new(),
                    edges: Vec::new(),
                })
                .internal
                .push(v);
        }
    }
    let mut paths: Vec<IndependentPath> = regions.into_values().chain(direct).collect();
    for p in &mut paths {
        p.sources.sort_unstable();
        p.sources.dedup();
        p.sinks.sort_unstable();
        p.sinks.dedup();
        p.internal.sort_unstable();
        p.edges.sort_unstable();
    }
    paths.sort_by_key(|p| (p.min_node(), p.edges.first().copied()));
    paths
}

/// Stage window of the sites on each path edge.
pub(crate) struct EdgeRanges {
    /// `(lo, hi)` per edge; empty when `lo > hi`.
    pub ranges: Vec<(i64, i64)>,
}

/// Latest source stage reaching each internal node through the region.
pub(crate) fn reach(sfq: &SfqNetwork, stages: &StageAssignment, path: &IndependentPath) -> BTreeMap<NodeId, i64> {
    let mut reach: BTreeMap<NodeId, i64> = BTreeMap::new();
    let mut indeg: BTreeMap<NodeId, usize> = path.internal.iter().map(|&x| (x, 0)).collect();
    for e in &path.edges {
        if sfq.is_aa(e.to) && sfq.is_aa(e.from) {
            *indeg.get_mut(&e.to).expect("internal node") += 1;
        }
    }
    let mut ready: Vec<NodeId> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&x, _)| x).collect();
    let mut incoming: BTreeMap<NodeId, Vec<&PathEdge>> = BTreeMap::new();
    let mut outgoing: BTreeMap<NodeId, Vec<&PathEdge>> = BTreeMap::new();
    for e in &path.edges {
        incoming.entry(e.to).or_default().push(e);
        outgoing.entry(e.from).or_default().push(e);
    }
    while let Some(x) = ready.pop() {
        let r = incoming
            .get(&x)
            .into_iter()
            .flatten()
            .map(|e| {
                if sfq.is_aa(e.from) {
                    reach[&e.from]
                } else {
                    stages.stage(e.from)
                }
            })
            .max()
            .unwrap_or(i64::MIN);
        reach.insert(x, r);
        for e in outgoing.get(&x).into_iter().flatten() {
            if sfq.is_aa(e.to) {
                let d = indeg.get_mut(&e.to).expect("internal node");
                *d -= 1;
                if *d == 0 {
                    ready.push(e.to);
                }
            }
        }
    }
    reach
}

pub(crate) fn edge_ranges(sfq: &SfqNetwork, stages: &StageAssignment, path: &IndependentPath) -> EdgeRanges {
    let reach = reach(sfq, stages, path);
    let ranges = path
        .edges
        .iter()
        .map(|e| {
            let lo = if sfq.is_aa(e.from) {
                stages.stage(e.from).max(reach[&e.from] + 1)
            } else {
                stages.stage(e.from) + 1
            };
            let hi = stages.stage(e.to) - i64::from(sfq.is_as(e.to));
            (lo, hi)
        })
        .collect();
    EdgeRanges { ranges }
}

/// One site per admissible stage of every path edge, in edge then stage
/// order. The site at an SA sink's own stage is forced.
pub fn enumerate_sites(sfq: &SfqNetwork, stages: &StageAssignment, path: &IndependentPath) -> Vec<DffSite> {
    let ranges = edge_ranges(sfq, stages, path);
    let mut sites = Vec::new();
    for (i, (e, &(lo, hi))) in path.edges.iter().zip(&ranges.ranges).enumerate() {
        for stage in lo..=hi {
            sites.push(DffSite {
                edge: i,
                stage,
                forced: sfq.is_sa(e.to) && stage == stages.stage(e.to),
            });
        }
    }
    sites
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathStats {
    pub sites: usize,
    pub dffs: usize,
    pub status: SolveStatus,
    pub traversals: usize,
    pub fallback: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone)]
pub struct DffResult {
    pub sfq: SfqNetwork,
    pub stages: StageAssignment,
    pub paths: Vec<IndependentPath>,
    pub stats: Vec<PathStats>,
    /// Worst status over all paths.
    pub status: SolveStatus,
    pub wall_time: Duration,
}

impl DffResult {
    pub fn dff_count(&self) -> usize {
        self.stats.iter().map(|s| s.dffs).sum()
    }
}

/// Selected sites of one path.
fn solve_path(
    sfq: &SfqNetwork,
    stages: &StageAssignment,
    path: &IndependentPath,
    spacing: SpacingMode,
    budget: SolverBudget,
) -> Result<(Vec<DffSite>, PathStats), DffError> {
    let sites = enumerate_sites(sfq, stages, path);
    if sites.is_empty() && !path.sinks.iter().any(|&s| sfq.is_sa(s)) {
        let stats = PathStats {
            sites: 0,
            dffs: 0,
            status: SolveStatus::Optimal,
            traversals: 0,
            fallback: false,
            nodes: 0,
        };
        return Ok((Vec::new(), stats));
    }
    let dm = build_insertion_model(sfq, stages, path, &sites, spacing, TRAVERSAL_LIMIT);
    let hint = dm.hint(sfq, stages, path, &sites);
    let sol = solve_with_hint(&dm.model, budget, Some(&hint))?;
    let chosen: Vec<DffSite> = if sol.status.has_solution() {
        sites
            .iter()
            .zip(&dm.site_vars)
            .filter(|(_, &v)| sol.is_true(v))
            .map(|(s, _)| *s)
            .collect()
    } else {
        Vec::new()
    };
    let stats = PathStats {
        sites: sites.len(),
        dffs: chosen.len(),
        status: sol.status,
        traversals: dm.traversals,
        fallback: dm.fallback,
        nodes: sol.stats.nodes,
    };
    Ok((chosen, stats))
}

/// Solves every path (in parallel when `cfg.threads` allows) and materializes
/// the selected DFFs. New DFF ids follow path order, then edge order, then
/// stage.
pub fn insert_dffs(
    sfq: &SfqNetwork,
    stages: &StageAssignment,
    cfg: &MappingConfig,
) -> Result<DffResult, DffError> {
    let start = std::time::Instant::now();
    let paths = extract_paths(sfq);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder.build().map_err(|e| DffError::Pool(e.to_string()))?;
    let solved: Vec<Result<(Vec<DffSite>, PathStats), DffError>> = pool.install(|| {
        paths
            .par_iter()
            .map(|p| solve_path(sfq, stages, p, cfg.spacing, cfg.dff_budget))
            .collect()
    });
    let mut out = sfq.clone();
    let mut sigma = stages.sigma.clone();
    let mut stats = Vec::with_capacity(paths.len());
    let mut status = SolveStatus::Optimal;
    for (path, result) in paths.iter().zip(solved) {
        let (chosen, st) = result?;
        status = status.worst(st.status);
        let mut by_edge: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
        for s in &chosen {
            by_edge.entry(s.edge).or_default().push(s.stage);
        }
        for (e, mut list) in by_edge {
            list.sort_unstable();
            let edge = path.edges[e];
            let mut prev = edge.from;
            for t in list {
                prev = out.push(GateKind::Dff, vec![prev]);
                sigma.push(t);
            }
            out.net.fanins_mut(edge.to)[edge.slot] = prev;
        }
        stats.push(st);
    }
    Ok(DffResult {
        sfq: out,
        stages: StageAssignment::new(stages.n, sigma),
        paths,
        stats,
        status,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{decompose, OrStyle};
    use crate::netlist::Network;

    /// PI -> NOT(a) -> [splitter] ... helper building AS -> AS with a gap.
    fn as_pair(gap: i64, n: u32) -> (SfqNetwork, StageAssignment) {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let x = net.add_gate(GateKind::Not, &[a]);
        let y = net.add_gate(GateKind::Not, &[x]);
        net.add_output(y, "o");
        let sfq = decompose(&net, OrStyle::Merger).unwrap();
        (sfq, StageAssignment::new(n, vec![0, 1, 1 + gap, 1 + gap]))
    }

    #[test]
    fn direct_edges_are_trivial_paths() {
        let (sfq, _) = as_pair(5, 4);
        let paths = extract_paths(&sfq);
        assert_eq!(paths.len(), 3);
        assert!(paths.iter().all(|p| p.internal.is_empty() && p.edges.len() == 1));
    }

    #[test]
    fn sites_on_as_gap() {
        let (sfq, st) = as_pair(5, 4);
        let paths = extract_paths(&sfq);
        let p = paths.iter().find(|p| p.edges[0] == PathEdge { from: 1, to: 2, slot: 0 }).unwrap();
        let stages: Vec<i64> = enumerate_sites(&sfq, &st, p).iter().map(|s| s.stage).collect();
        assert_eq!(stages, vec![2, 3, 4, 5]);
    }

    #[test]
    fn direct_as_to_sa_at_same_stage_has_no_site() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let b = net.add_input("b");
        let x = net.add_gate(GateKind::Not, &[a]);
        let y = net.add_gate(GateKind::Not, &[b]);
        let g = net.add_gate(GateKind::And, &[x, y]);
        net.add_output(g, "o");
        let sfq = decompose(&net, OrStyle::Merger).unwrap();
        let st = StageAssignment::new(4, vec![0, 0, 2, 2, 2, 2]);
        for p in extract_paths(&sfq).iter().filter(|p| p.sinks == vec![g]) {
            assert!(enumerate_sites(&sfq, &st, p).is_empty());
        }
    }

    #[test]
    fn splitter_into_sa_has_forced_site() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let x = net.add_gate(GateKind::Not, &[a]);
        let s = net.add_gate(GateKind::Splitter, &[x]);
        let g = net.add_gate(GateKind::And, &[s, s]);
        net.add_output(g, "o");
        let sfq = SfqNetwork::from_network(net).unwrap();
        let st = StageAssignment::new(4, vec![0, 2, 3, 3, 3]);
        let paths = extract_paths(&sfq);
        let p = paths.iter().find(|p| p.internal == vec![s]).unwrap();
        let sites = enumerate_sites(&sfq, &st, p);
        let forced: Vec<_> = sites.iter().filter(|d| d.forced).collect();
        assert_eq!(forced.len(), 2);
        assert!(forced.iter().all(|d| d.stage == 3));
    }

    #[test]
    fn single_splitter_region() {
        let mut net = Network::new("t");
        let a = net.add_input("a");
        let x = net.add_gate(GateKind::Not, &[a]);
        let s = net.add_gate(GateKind::Splitter, &[x]);
        let y = net.add_gate(GateKind::Not, &[s]);
        let z = net.add_gate(GateKind::Not, &[s]);
        let m = net.add_gate(GateKind::Merger, &[y, z]);
        net.add_output(m, "o");
        let sfq = SfqNetwork::from_network(net).unwrap();
        let paths = extract_paths(&sfq);
        let p = paths.iter().find(|p| p.internal == vec![s]).unwrap();
        assert_eq!(p.sources, vec![x]);
        assert_eq!(p.sinks, vec![y, z]);
        // Every edge in exactly one path.
        let total: usize = paths.iter().map(|p| p.edges.len()).sum();
        assert_eq!(total, sfq.net.edges().count());
    }

    #[test]
    fn balanced_network_gets_no_dffs() {
        let (sfq, st) = as_pair(1, 1);
        let mut cfg = MappingConfig::new(1);
        cfg.threads = Some(1);
        let r = insert_dffs(&sfq, &st, &cfg).unwrap();
        assert_eq!(r.dff_count(), 0);
        assert_eq!(r.sfq, sfq);
    }

    #[test]
    fn gap_five_needs_one_dff() {
        let (sfq, st) = as_pair(5, 4);
        let r = insert_dffs(&sfq, &st, &MappingConfig::new(4)).unwrap();
        assert_eq!(r.dff_count(), 1);
        assert_eq!(r.status, SolveStatus::Optimal);
        let d = sfq.len();
        assert_eq!(r.sfq.kind(d), GateKind::Dff);
        assert_eq!(r.sfq.net.fanins(2), &[d]);
        assert_eq!(r.sfq.net.fanins(d), &[1]);
    }
}
