use proptest::prelude::*;
use sfqmap::netlist::equivalent;
use sfqmap::random::{random_network, rng};
use sfqmap::{map_network, GateKind, MappingConfig, ObjectiveMode, OrStyle, SpacingMode};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn mapped_networks_verify_and_stay_equivalent(
        seed in any::<u64>(),
        n in 1u32..=5,
        gates in 1usize..=25,
        edge_mode in any::<bool>(),
        sa_or in any::<bool>(),
    ) {
        let net = random_network(&mut rng(seed), "r", 4, gates);
        let mut cfg = MappingConfig::new(n).with_node_limits(20_000, 20_000);
        cfg.threads = Some(1);
        cfg.objective = if edge_mode { ObjectiveMode::Edge } else { ObjectiveMode::GateMax };
        cfg.or_style = if sa_or { OrStyle::SaOr } else { OrStyle::Merger };
        let m = map_network(&net, &cfg).unwrap();
        prop_assert!(m.validation.ok(), "{}", m.validation);
        prop_assert!(equivalent(&net, &m.sfq.net, seed).unwrap());
        prop_assert_eq!(m.sfq.net.count_kind(GateKind::Dff), m.dff_count());
        prop_assert_eq!(m.sfq.net.count_kind(GateKind::Splitter), m.splitters.splitter_count());
    }

    #[test]
    fn chain_literal_spacing_never_needs_more_dffs(seed in any::<u64>(), n in 1u32..=4) {
        let net = random_network(&mut rng(seed), "r", 3, 12);
        let mut cfg = MappingConfig::new(n).with_node_limits(20_000, 20_000);
        cfg.threads = Some(1);
        let window = map_network(&net, &cfg).unwrap();
        cfg.spacing = SpacingMode::ChainLiteral;
        let chain = map_network(&net, &cfg).unwrap();
        prop_assert!(chain.dff_count() <= window.dff_count());
    }
}

#[test]
fn single_phase_fills_every_as_gap() {
    // With one phase every stage step is a clock cycle, so every AS-to-AS
    // gap is filled with DFFs: the verifier's spacing rule then holds with n = 1.
    for seed in 0..10 {
        let net = random_network(&mut rng(seed), "r", 4, 20);
        let cfg = MappingConfig::new(1).with_node_limits(50_000, 50_000);
        let m = map_network(&net, &cfg).unwrap();
        assert!(m.validation.ok(), "{}", m.validation);
        for v in 0..m.sfq.len() {
            if !m.sfq.is_as(v) {
                continue;
            }
            let mut stack = m.sfq.net.fanins(v).to_vec();
            while let Some(u) = stack.pop() {
                if m.sfq.is_aa(u) {
                    stack.extend_from_slice(m.sfq.net.fanins(u));
                } else {
                    assert_eq!(m.stages.stage(v) - m.stages.stage(u), 1, "{u}->{v}");
                }
            }
        }
    }
}
