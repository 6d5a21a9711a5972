//! End-to-end behaviour of base change followed by stabilization.

mod common;

use rand::rngs::StdRng;
use rand::SeedableRng;
use stabred_core::{
    apply_base_change, arithmetic_genus, canonical_form, component_invariants,
    enumerate_stable_configs, stability_report, stabilize, DescentData, FiberKind, MoveTrace,
};

#[test]
fn base_change_then_stabilize_roundtrips_stable_graphs() {
    for genus in [2u64, 3] {
        let classes = enumerate_stable_configs(genus, 6).unwrap();
        assert!(!classes.is_empty());
        for config in &classes {
            let reference = canonical_form(config).unwrap();
            for n in 2..=6u64 {
                let descent = DescentData::trivial(config, n);
                let (reduced, _) = apply_base_change(config, &descent).unwrap();
                assert!(reduced.validate().is_valid());
                assert!(reduced.edges().iter().all(|e| !e.is_loop()));
                let (stable, trace) = stabilize(&reduced).unwrap();
                assert_eq!(
                    canonical_form(&stable).unwrap(),
                    reference,
                    "roundtrip failed for genus {genus}, N = {n}"
                );
                // each node gained a chain of N - 1 rational curves and
                // every one of them contracts again
                assert_eq!(trace.len() as u64, (n - 1) * config.edge_count() as u64);
            }
        }
    }
}

#[test]
fn genus_is_conserved_across_random_pipelines() {
    let seeds = common::stable_seeds(&[2, 3, 4]);
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..300 {
        let config = common::random_reduced_config(&seeds, &mut rng, 6);
        let before = arithmetic_genus(&config).unwrap();
        for n in [2u64, 3, 4] {
            let descent = DescentData::trivial(&config, n);
            let (reduced, _) = apply_base_change(&config, &descent).unwrap();
            assert_eq!(arithmetic_genus(&reduced).unwrap(), before);
            let (stable, _) = stabilize(&reduced).unwrap();
            assert_eq!(arithmetic_genus(&stable).unwrap(), before);
            assert!(stability_report(&stable).unwrap().stable);
        }
    }
}

#[test]
fn contraction_order_does_not_matter() {
    let seeds = common::stable_seeds(&[2, 3]);
    let mut rng = StdRng::seed_from_u64(41);
    for _ in 0..30 {
        let config = common::random_reduced_config(&seeds, &mut rng, 5);
        let (stable, _) = stabilize(&config).unwrap();
        let reference = canonical_form(&stable).unwrap();
        for _ in 0..30 {
            let shuffled = common::contract_random_order(&config, &mut rng);
            assert_eq!(canonical_form(&shuffled).unwrap(), reference);
        }
    }
}

#[test]
fn full_pipeline_trace_replays_exactly() {
    let seeds = common::stable_seeds(&[2, 3]);
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..40 {
        let config = common::random_reduced_config(&seeds, &mut rng, 4);
        let descent = DescentData::trivial(&config, 3);
        let (reduced, bc_trace) = apply_base_change(&config, &descent).unwrap();
        let (stable, st_trace) = stabilize(&reduced).unwrap();
        let mut full = MoveTrace::default();
        full.extend(bc_trace);
        full.extend(st_trace);
        let replayed = full.replay(&config, FiberKind::StableCandidate).unwrap();
        assert_eq!(
            canonical_form(&replayed).unwrap(),
            canonical_form(&stable).unwrap()
        );
        // ids are preserved move by move, so the graphs agree on the nose
        assert_eq!(replayed.edges(), stable.edges());
    }
}

#[test]
fn stabilization_shrinks_to_the_seed() {
    // Un-contracting then stabilizing returns the exact seed class.
    let seeds = common::stable_seeds(&[2, 3]);
    let mut rng = StdRng::seed_from_u64(99);
    for seed in seeds.iter().take(20) {
        let reference = canonical_form(seed).unwrap();
        for _ in 0..5 {
            let blown_up = common::uncontract(seed, &mut rng, 5);
            let (stable, trace) = stabilize(&blown_up).unwrap();
            assert_eq!(canonical_form(&stable).unwrap(), reference);
            assert!(trace.len() <= blown_up.component_count());
        }
    }
}

#[test]
fn dualizing_degree_sums_match_the_genus() {
    let seeds = common::stable_seeds(&[2, 3, 4]);
    for config in &seeds {
        let p_a = arithmetic_genus(config).unwrap();
        let invariants = component_invariants(config).unwrap();
        let total: i64 = invariants.values().map(|i| i.dualizing_degree).sum();
        assert_eq!(total, 2 * p_a as i64 - 2);
    }
}
