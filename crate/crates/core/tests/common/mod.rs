//! Shared helpers: randomized reduced configurations produced by
//! un-contracting enumerated stable graphs, so every sample has a known
//! arithmetic genus and stabilizes back to something sensible.

// each test target uses its own subset of these helpers
#![allow(dead_code)]

use rand::prelude::*;
use rand::rngs::StdRng;
use stabred_core::{
    classify_components, contract_one, enumerate_stable_configs, Component, ComponentClass,
    ComponentId, FiberConfiguration, FiberKind,
};

pub fn stable_seeds(genera: &[u64]) -> Vec<FiberConfiguration> {
    let mut seeds = Vec::new();
    for &g in genera {
        let max_vertices = (2 * g as usize - 2).min(8);
        seeds.extend(enumerate_stable_configs(g, max_vertices).expect("within bounds"));
    }
    seeds
}

type Parts = (
    Vec<(ComponentId, Component)>,
    Vec<(ComponentId, ComponentId)>,
);

fn parts(config: &FiberConfiguration) -> Parts {
    let comps = config
        .components()
        .map(|(id, c)| (id.clone(), *c))
        .collect();
    let edges = config
        .edges()
        .iter()
        .map(|e| {
            let (x, y) = e.endpoints();
            (x.clone(), y.clone())
        })
        .collect();
    (comps, edges)
}

/// Applies `moves` random inverse contractions (attach a rational tail,
/// or subdivide a node by a rational chain vertex) to a stable seed.
/// Both moves conserve the arithmetic genus.
pub fn uncontract(seed: &FiberConfiguration, rng: &mut StdRng, moves: usize) -> FiberConfiguration {
    let (mut comps, mut edges) = parts(seed);
    let mut counter = 0usize;
    for _ in 0..moves {
        counter += 1;
        let fresh = ComponentId::new(format!("w{counter}")).unwrap();
        comps.push((
            fresh.clone(),
            Component {
                genus: 0,
                multiplicity: 1,
            },
        ));
        if !edges.is_empty() && rng.gen_bool(0.5) {
            // subdivide a random node
            let k = rng.gen_range(0..edges.len());
            let (x, y) = edges.swap_remove(k);
            edges.push((x, fresh.clone()));
            edges.push((fresh, y));
        } else {
            // hang a tail on a random component
            let k = rng.gen_range(0..comps.len() - 1);
            let anchor = comps[k].0.clone();
            edges.push((anchor, fresh));
        }
    }
    FiberConfiguration::new(FiberKind::Reduced, None, comps, edges).expect("well-formed")
}

pub fn random_reduced_config(
    seeds: &[FiberConfiguration],
    rng: &mut StdRng,
    max_moves: usize,
) -> FiberConfiguration {
    let seed = &seeds[rng.gen_range(0..seeds.len())];
    let moves = rng.gen_range(0..=max_moves);
    uncontract(seed, rng, moves)
}

/// Renames every component to a shuffled fresh name.
pub fn random_relabel(config: &FiberConfiguration, rng: &mut StdRng) -> FiberConfiguration {
    let ids: Vec<ComponentId> = config.component_ids().cloned().collect();
    let mut names: Vec<ComponentId> = (0..ids.len())
        .map(|i| ComponentId::new(format!("r{i:03}")).unwrap())
        .collect();
    names.shuffle(rng);
    let map = ids.into_iter().zip(names).collect();
    config.relabel(&map).expect("bijective relabeling")
}

/// Contracts contractible components in a random admissible order until
/// none is left.
pub fn contract_random_order(config: &FiberConfiguration, rng: &mut StdRng) -> FiberConfiguration {
    let mut current = config.clone();
    loop {
        let targets: Vec<ComponentId> = classify_components(&current)
            .into_iter()
            .filter(|(_, class)| {
                matches!(
                    class,
                    ComponentClass::BlowDown | ComponentClass::ChainMember
                )
            })
            .map(|(id, _)| id)
            .collect();
        if targets.is_empty() {
            return current;
        }
        let id = &targets[rng.gen_range(0..targets.len())];
        let (next, _) = contract_one(&current, id).expect("classified contractible");
        current = next;
    }
}
