//! Exhaustive DFF count for small paths, written without the site model.

use thiserror::Error;

use super::IndependentPath;
use crate::decompose::SfqNetwork;
use crate::phase::StageAssignment;

/// Largest number of candidate sites the oracle enumerates.
pub const ORACLE_SITE_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} candidate sites exceed the oracle limit")]
    TooManySites(usize),
}

/// Fewest DFFs making every source-to-sink walk of `path` legal, found by
/// trying candidate subsets in order of size. A walk is legal when its
/// clocked stages (source, DFFs, sink) strictly increase, except that SA and
/// PO sinks may equal the last element; consecutive elements are at most `w`
/// apart; an SA sink is fed at its own stage. `None` when no subset works.
pub fn brute_force_min_dffs(
    sfq: &SfqNetwork,
    stages: &StageAssignment,
    path: &IndependentPath,
    w: i64,
) -> Result<Option<usize>, OracleError> {
    let mut cands: Vec<(usize, i64)> = Vec::new();
    for (i, e) in path.edges.iter().enumerate() {
        let lo = stages.stage(e.from) + i64::from(!sfq.is_aa(e.from));
        let hi = stages.stage(e.to) - i64::from(sfq.is_as(e.to));
        for t in lo..=hi {
            cands.push((i, t));
        }
    }
    if cands.len() > ORACLE_SITE_LIMIT {
        return Err(OracleError::TooManySites(cands.len()));
    }
    let walks = walks(sfq, path);
    let m = cands.len();
    for k in 0..=m {
        let mut found = false;
        for_each_subset(m, k, |mask| {
            if !found && walks.iter().all(|walk| legal(sfq, stages, path, walk, &cands, mask, w)) {
                found = true;
            }
        });
        if found {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

fn walks(sfq: &SfqNetwork, path: &IndependentPath) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn extend(sfq: &SfqNetwork, path: &IndependentPath, walk: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let head = path.edges[*walk.last().unwrap()].to;
        if !sfq.is_aa(head) {
            out.push(walk.clone());
            return;
        }
        for (i, e) in path.edges.iter().enumerate() {
            if e.from == head {
                walk.push(i);
                extend(sfq, path, walk, out);
                walk.pop();
            }
        }
    }
    for (i, e) in path.edges.iter().enumerate() {
        if !sfq.is_aa(e.from) {
            extend(sfq, path, &mut vec![i], &mut out);
        }
    }
    out
}

fn for_each_subset(m: usize, k: usize, mut f: impl FnMut(u32)) {
    if k == 0 {
        f(0);
        return;
    }
    let limit = 1u32 << m;
    let mut mask: u32 = (1 << k) - 1;
    while mask < limit {
        f(mask);
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
}

fn legal(
    sfq: &SfqNetwork,
    stages: &StageAssignment,
    path: &IndependentPath,
    walk: &[usize],
    cands: &[(usize, i64)],
    mask: u32,
    w: i64,
) -> bool {
    let source = path.edges[walk[0]].from;
    let last_edge = *walk.last().unwrap();
    let sink = path.edges[last_edge].to;
    let mut seq = vec![stages.stage(source)];
    for &e in walk {
        for (j, &(ce, t)) in cands.iter().enumerate() {
            if ce == e && mask >> j & 1 == 1 {
                seq.push(t);
            }
        }
    }
    if seq.windows(2).any(|p| p[1] <= p[0]) {
        return false;
    }
    let last = *seq.last().unwrap();
    let ts = stages.stage(sink);
    if sfq.is_as(sink) && last >= ts || last > ts || ts - last > w {
        return false;
    }
    if sfq.is_sa(sink) {
        let fed_by_site = seq.len() > 1
            && cands
                .iter()
                .enumerate()
                .any(|(j, &(ce, t))| ce == last_edge && t == ts && mask >> j & 1 == 1);
        let fed_directly =
            walk.len() == 1 && seq.len() == 1 && !sfq.is_sa(source) && last == ts;
        if !fed_by_site && !fed_directly {
            return false;
        }
    }
    seq.windows(2).all(|p| p[1] - p[0] <= w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_by_size() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |m| seen.push(m));
        assert_eq!(seen.len(), 6);
        assert!(seen.iter().all(|m| m.count_ones() == 2));
        let mut z = 0;
        for_each_subset(3, 0, |_| z += 1);
        assert_eq!(z, 1);
    }
}
