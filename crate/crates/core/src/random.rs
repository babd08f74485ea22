//! Seeded generators of models, logic networks and independent paths.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decompose::SfqNetwork;
use crate::dff::{enumerate_sites, extract_paths, IndependentPath};
use crate::netlist::{GateKind, Network, NodeId};
use crate::phase::StageAssignment;
use crate::solver::{Cmp, Literal};
use crate::Model;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random model with up to 12 booleans and 6 integers of domain size at most
/// 8, a few linear rows and clauses, and a mixed-sign objective.
pub fn random_model(rng: &mut impl Rng) -> Model {
    let mut m = Model::new();
    let nb = rng.gen_range(0..=12);
    let ni = rng.gen_range(if nb == 0 { 1 } else { 0 }..=6);
    let mut vars = Vec::new();
    for i in 0..ni {
        let lo = rng.gen_range(-4..=4);
        let hi = lo + rng.gen_range(0..=7);
        vars.push(m.new_int(format!("x{i}"), lo, hi));
    }
    let bools: Vec<_> = (0..nb).map(|i| m.new_bool(format!("b{i}"))).collect();
    vars.extend(&bools);
    for _ in 0..rng.gen_range(0..=5) {
        let k = rng.gen_range(1..=vars.len().min(4));
        let terms = vars
            .choose_multiple(rng, k)
            .map(|&v| (rng.gen_range(-3..=3), v))
            .collect();
        let cmp = [Cmp::Le, Cmp::Le, Cmp::Ge, Cmp::Ge, Cmp::Eq][rng.gen_range(0..5)];
        let bound = rng.gen_range(-8..=8);
        m.add_linear(terms, cmp, bound);
    }
    if !bools.is_empty() {
        for _ in 0..rng.gen_range(0..=4) {
            let k = rng.gen_range(1..=bools.len().min(3));
            let lits = bools
                .choose_multiple(rng, k)
                .map(|&b| if rng.gen_bool(0.5) { Literal::pos(b) } else { Literal::neg(b) })
                .collect();
            m.add_clause(lits);
        }
        if rng.gen_bool(0.2) {
            let b = *bools.choose(rng).expect("non-empty");
            m.force(Literal::pos(b));
        }
    }
    let obj = vars.iter().map(|&v| (rng.gen_range(-3..=3), v)).collect();
    m.minimize(obj);
    m
}

/// Random combinational network over AND/OR/XOR/NOT with `inputs` PIs and
/// `gates` gates. Every gate without fanout becomes an output.
pub fn random_network(rng: &mut impl Rng, name: &str, inputs: usize, gates: usize) -> Network {
    let mut net = Network::new(name);
    let mut signals: Vec<NodeId> = (0..inputs.max(1)).map(|i| net.add_input(format!("i{i}"))).collect();
    let mut used = vec![false; inputs.max(1) + gates];
    for _ in 0..gates {
        // Prefer recent signals so the network gets some depth.
        let pick = |rng: &mut dyn rand::RngCore, signals: &[NodeId]| {
            let lo = signals.len().saturating_sub(8);
            if rng.gen_bool(0.7) {
                signals[rng.gen_range(lo..signals.len())]
            } else {
                signals[rng.gen_range(0..signals.len())]
            }
        };
        let kind = [GateKind::And, GateKind::Or, GateKind::Xor, GateKind::Not][rng.gen_range(0..4)];
        let a = pick(rng, &signals);
        let g = if kind == GateKind::Not {
            net.add_gate(kind, &[a])
        } else {
            let mut b = pick(rng, &signals);
            if b == a && signals.len() > 1 {
                b = signals[(signals.iter().position(|&s| s == a).expect("present") + 1) % signals.len()];
            }
            used[b] = true;
            net.add_gate(kind, &[a, b])
        };
        used[a] = true;
        signals.push(g);
    }
    let mut outs = 0;
    for &s in &signals {
        if !used[s] && net.kind(s) != GateKind::Pi {
            net.add_output(s, format!("o{outs}"));
            outs += 1;
        }
    }
    if outs == 0 {
        let last = *signals.last().expect("non-empty");
        net.add_output(last, "o0");
    }
    net
}

/// A staged network whose first asynchronous region is returned as the path.
#[derive(Debug, Clone)]
pub struct PathInstance {
    pub sfq: SfqNetwork,
    pub stages: StageAssignment,
    pub path: IndependentPath,
}

/// Random asynchronous region (splitters and mergers) between clocked
/// sources (PI, AS, SA) and sinks (AS, SA, PO) with stages that respect
/// edge order. Retries until the region has between 1 and `max_sites`
/// candidate sites.
pub fn random_path_instance(rng: &mut impl Rng, n: u32, max_sites: usize) -> PathInstance {
    loop {
        if let Some(p) = try_path_instance(rng, n, max_sites) {
            return p;
        }
    }
}

fn try_path_instance(rng: &mut impl Rng, n: u32, max_sites: usize) -> Option<PathInstance> {
    let nn = i64::from(n);
    let mut net = Network::new("path");
    let mut sigma: Vec<i64> = Vec::new();
    let add = |net: &mut Network, sigma: &mut Vec<i64>, kind: GateKind, fanins: &[NodeId], s: i64| {
        let id = if kind == GateKind::Pi {
            net.add_input(format!("p{}", net.len()))
        } else if kind == GateKind::Po {
            net.add_output(fanins[0], format!("q{}", net.len()))
        } else {
            net.add_gate(kind, fanins)
        };
        sigma.push(s);
        id
    };
    // Pool of dangling signals.
    let mut pool: Vec<NodeId> = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let s = rng.gen_range(1..=3);
        let src = match rng.gen_range(0..3) {
            0 => add(&mut net, &mut sigma, GateKind::Pi, &[], rng.gen_range(0..nn)),
            1 => {
                let p = add(&mut net, &mut sigma, GateKind::Pi, &[], 0);
                add(&mut net, &mut sigma, GateKind::Not, &[p], s)
            }
            _ => {
                let p = add(&mut net, &mut sigma, GateKind::Pi, &[], 0);
                let q = add(&mut net, &mut sigma, GateKind::Pi, &[], 0);
                add(&mut net, &mut sigma, GateKind::And, &[p, q], s)
            }
        };
        pool.push(src);
    }
    for _ in 0..rng.gen_range(1..=4) {
        let merge = pool.len() >= 2 && rng.gen_bool(0.5);
        if merge {
            pool.shuffle(rng);
            let (a, b) = (pool.pop().expect("two"), pool.pop().expect("two"));
            let s = sigma[a].max(sigma[b]) + rng.gen_range(0..=2);
            let m = add(&mut net, &mut sigma, GateKind::Merger, &[a, b], s);
            pool.push(m);
        } else {
            let i = rng.gen_range(0..pool.len());
            let a = pool.swap_remove(i);
            let s = sigma[a] + rng.gen_range(0..=2);
            let sp = add(&mut net, &mut sigma, GateKind::Splitter, &[a], s);
            pool.push(sp);
            pool.push(sp);
        }
    }
    for a in pool {
        let s = sigma[a];
        match rng.gen_range(0..3) {
            0 => {
                let g = add(&mut net, &mut sigma, GateKind::Not, &[a], s + rng.gen_range(1..=nn + 2));
                let t = sigma[g];
                add(&mut net, &mut sigma, GateKind::Po, &[g], t);
            }
            1 => {
                let t = s + rng.gen_range(0..=nn + 1);
                let p = add(&mut net, &mut sigma, GateKind::Pi, &[], 0);
                let g = add(&mut net, &mut sigma, GateKind::And, &[a, p], t);
                add(&mut net, &mut sigma, GateKind::Po, &[g], t);
            }
            _ => {
                add(&mut net, &mut sigma, GateKind::Po, &[a], s + rng.gen_range(0..=nn + 1));
            }
        }
    }
    let sfq = SfqNetwork::from_network(net).ok()?;
    let stages = StageAssignment::new(n, sigma);
    let path = extract_paths(&sfq).into_iter().find(|p| !p.internal.is_empty())?;
    let k = enumerate_sites(&sfq, &stages, &path).len();
    (1..=max_sites).contains(&k).then_some(PathInstance { sfq, stages, path })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = random_network(&mut rng(3), "r", 5, 30);
        let b = random_network(&mut rng(3), "r", 5, 30);
        assert_eq!(a, b);
        assert!(a.validate().ok());
        let p = random_path_instance(&mut rng(9), 3, 12);
        let q = random_path_instance(&mut rng(9), 3, 12);
        assert_eq!(p.path, q.path);
        assert_eq!(p.stages, q.stages);
    }

    #[test]
    fn random_models_are_small() {
        let mut r = rng(1);
        for _ in 0..50 {
            let m = random_model(&mut r);
            assert!(m.bool_vars().count() <= 12);
            assert!(m.int_vars().count() <= 6);
            for v in m.int_vars() {
                let d = m.var(v);
                assert!(d.upper - d.lower < 8);
            }
        }
    }
}
