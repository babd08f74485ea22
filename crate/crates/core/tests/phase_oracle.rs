use proptest::prelude::*;
use sfqmap::random::{random_network, rng};
use sfqmap::solver::{SolveStatus, SolverBudget};
use sfqmap::{assign_stages, decompose, GateKind, MappingConfig, ObjectiveMode, OrStyle, SfqNetwork};

fn is_sa(sfq: &SfqNetwork, x: usize) -> bool {
    matches!(sfq.kind(x), GateKind::And) || sfq.kind(x) == GateKind::Or && sfq.is_sa(x)
}

fn is_as(sfq: &SfqNetwork, x: usize) -> bool {
    matches!(sfq.kind(x), GateKind::Not | GateKind::Xor | GateKind::Dff)
}

/// Smallest stage gap a legal assignment allows on edge `a -> g`.
fn min_gap(sfq: &SfqNetwork, fanout: &[usize], a: usize, g: usize) -> i64 {
    if is_as(sfq, g) {
        1
    } else if is_sa(sfq, g) {
        let direct = (is_as(sfq, a) || sfq.kind(a) == GateKind::Pi) && fanout[a] == 1;
        i64::from(!direct)
    } else {
        0
    }
}

fn cost(sfq: &SfqNetwork, n: i64, mode: ObjectiveMode, s: &[i64]) -> i64 {
    let bonus = |x: usize| i64::from(is_sa(sfq, x));
    let edges: Vec<(usize, usize)> = sfq.net.edges().map(|(u, v, _)| (u, v)).collect();
    match mode {
        ObjectiveMode::Edge => edges.iter().map(|&(u, v)| (s[v] - s[u] + bonus(v)).div_euclid(n)).sum(),
        ObjectiveMode::GateMax => (0..sfq.len())
            .filter_map(|g| {
                let m = edges.iter().filter(|e| e.0 == g).map(|&(_, v)| s[v] + bonus(v)).max()?;
                Some((m - s[g]).div_euclid(n))
            })
            .sum(),
    }
}

/// Exhaustive minimum over every stage vector in `[0, limit]`.
fn brute_force(sfq: &SfqNetwork, n: i64, mode: ObjectiveMode, limit: i64) -> Option<i64> {
    let order = sfq.net.topological_order().unwrap();
    let mut fanout = vec![0usize; sfq.len()];
    for (u, _, _) in sfq.net.edges() {
        fanout[u] += 1;
    }
    let mut s = vec![0i64; sfq.len()];
    let mut best = None;
    fn rec(
        k: usize,
        order: &[usize],
        sfq: &SfqNetwork,
        fanout: &[usize],
        n: i64,
        mode: ObjectiveMode,
        limit: i64,
        s: &mut Vec<i64>,
        best: &mut Option<i64>,
    ) {
        if k == order.len() {
            let outs = sfq.net.primary_outputs();
            let e0 = s[outs[0]].div_euclid(n);
            if outs.iter().all(|&o| s[o].div_euclid(n) == e0) {
                let c = cost(sfq, n, mode, s);
                if best.map_or(true, |b| c < b) {
                    *best = Some(c);
                }
            }
            return;
        }
        let x = order[k];
        let hi = if sfq.kind(x) == GateKind::Pi { n - 1 } else { limit };
        let lo = sfq
            .net
            .fanins(x)
            .iter()
            .map(|&a| s[a] + min_gap(sfq, fanout, a, x))
            .max()
            .unwrap_or(0);
        for t in lo..=hi {
            s[x] = t;
            rec(k + 1, order, sfq, fanout, n, mode, limit, s, best);
        }
    }
    rec(0, &order, sfq, &fanout, n, mode, limit, &mut s, &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn phase_model_matches_enumeration(
        seed in any::<u64>(),
        n in 1u32..=3,
        gates in 1usize..=3,
        edge_mode in any::<bool>(),
        sa_or in any::<bool>(),
    ) {
        let net = random_network(&mut rng(seed), "r", 2, gates);
        let style = if sa_or { OrStyle::SaOr } else { OrStyle::Merger };
        let sfq = decompose(&net, style).unwrap();
        let mode = if edge_mode { ObjectiveMode::Edge } else { ObjectiveMode::GateMax };
        let mut cfg = MappingConfig::new(n);
        cfg.objective = mode;
        cfg.or_style = style;
        cfg.phase_budget = SolverBudget::unlimited();
        let r = assign_stages(&sfq, &cfg).unwrap();
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        let nn = i64::from(n);
        let depth = gates as i64;
        let expected = brute_force(&sfq, nn, mode, nn * (depth + 2)).unwrap();
        prop_assert_eq!(r.objective, expected);
        prop_assert_eq!(cost(&sfq, nn, mode, &r.stages.sigma), r.objective);
    }
}
