use proptest::prelude::*;
use sfqmap::dff::{brute_force_min_dffs, build_insertion_model, enumerate_sites, last_site_selection, TRAVERSAL_LIMIT};
use sfqmap::random::{random_path_instance, rng};
use sfqmap::solver::{solve, verify_solution, SolveStatus, SolverBudget};
use sfqmap::SpacingMode;

fn model_count(inst: &sfqmap::random::PathInstance, limit: usize) -> Option<usize> {
    let sites = enumerate_sites(&inst.sfq, &inst.stages, &inst.path);
    let dm = build_insertion_model(&inst.sfq, &inst.stages, &inst.path, &sites, SpacingMode::Window, limit);
    let sol = solve(&dm.model, SolverBudget::unlimited()).unwrap();
    match sol.status {
        SolveStatus::Optimal => Some(sol.objective as usize),
        SolveStatus::Infeasible => None,
        s => panic!("unexpected status {s:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn model_matches_enumeration(seed in any::<u64>(), n in 1u32..=5) {
        let inst = random_path_instance(&mut rng(seed), n, 12);
        let oracle = brute_force_min_dffs(&inst.sfq, &inst.stages, &inst.path, i64::from(n)).unwrap();
        prop_assert_eq!(model_count(&inst, TRAVERSAL_LIMIT), oracle);
    }

    #[test]
    fn fallback_matches_traversals(seed in any::<u64>(), n in 1u32..=5) {
        let inst = random_path_instance(&mut rng(seed), n, 12);
        prop_assert_eq!(model_count(&inst, 0), model_count(&inst, TRAVERSAL_LIMIT));
    }

    #[test]
    fn last_site_hint_is_feasible(seed in any::<u64>(), n in 1u32..=5, limit in prop_oneof![Just(0usize), Just(TRAVERSAL_LIMIT)]) {
        let inst = random_path_instance(&mut rng(seed), n, 12);
        let sites = enumerate_sites(&inst.sfq, &inst.stages, &inst.path);
        let dm = build_insertion_model(&inst.sfq, &inst.stages, &inst.path, &sites, SpacingMode::Window, limit);
        if model_count(&inst, limit).is_some() {
            let hint = dm.hint(&inst.sfq, &inst.stages, &inst.path, &sites);
            prop_assert!(verify_solution(&dm.model, &hint).unwrap());
        }
        let pick = last_site_selection(&inst.sfq, &inst.stages, &inst.path, &sites);
        for (s, p) in sites.iter().zip(pick) {
            prop_assert!(!s.forced || p);
        }
    }
}
