//! Enumeration of stable dual graphs of a given genus.
//!
//! A stable graph of genus g is a connected multigraph with genus labels
//! satisfying sum of labels + first Betti number = g and positive
//! dualizing degree at every vertex (genus 0 needs valence >= 3, genus 1
//! needs valence >= 1, loops counting twice). The edge count is pinned
//! by the labels: E = g - sum + V - 1. Generation walks label vectors
//! and edge multisets with a valence-deficit prune and deduplicates by
//! canonical form.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::canon::canonical_form;
use crate::model::{Component, ComponentId, FiberConfiguration, FiberKind};

/// Desk-scale bound on the genus.
pub const MAX_ENUMERATION_GENUS: u64 = 5;
/// Desk-scale bound on the vertex count.
pub const MAX_ENUMERATION_VERTICES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("enumeration requires genus >= 2, got {0}")]
    GenusTooSmall(u64),
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
}

/// All isomorphism classes of stable graphs of the given genus with at
/// most `max_vertices` vertices, sorted by canonical form.
pub fn enumerate_stable_configs(
    genus: u64,
    max_vertices: usize,
) -> Result<Vec<FiberConfiguration>, EnumerateError> {
    if genus < 2 {
        return Err(EnumerateError::GenusTooSmall(genus));
    }
    if genus > MAX_ENUMERATION_GENUS {
        return Err(EnumerateError::BoundExceeded(format!(
            "genus {genus} is above the enumeration bound {MAX_ENUMERATION_GENUS}"
        )));
    }
    if max_vertices == 0 || max_vertices > MAX_ENUMERATION_VERTICES {
        return Err(EnumerateError::BoundExceeded(format!(
            "vertex bound {max_vertices} is outside 1..={MAX_ENUMERATION_VERTICES}"
        )));
    }

    let mut classes: BTreeMap<String, FiberConfiguration> = BTreeMap::new();
    for v in 1..=max_vertices {
        let mut labels = vec![0u64; v];
        label_vectors(genus, &mut labels, 0, genus, &mut |labels| {
            let total: u64 = labels.iter().sum();
            let betti = genus - total;
            let edges_needed = betti as usize + v - 1;
            edge_multisets(labels, edges_needed, &mut |edges| {
                if let Some(config) = build(labels, edges) {
                    let form = canonical_form(&config).expect("within the vertex bound");
                    classes.entry(form).or_insert(config);
                }
            });
        });
    }
    Ok(classes.into_values().collect())
}

/// Canonical forms of the classes from [`enumerate_stable_configs`],
/// sorted and duplicate-free.
pub fn enumerate_stable_graphs(
    genus: u64,
    max_vertices: usize,
) -> Result<Vec<String>, EnumerateError> {
    let configs = enumerate_stable_configs(genus, max_vertices)?;
    Ok(configs
        .iter()
        .map(|c| canonical_form(c).expect("within the vertex bound"))
        .collect())
}

/// Non-increasing genus labels with sum <= budget.
fn label_vectors(
    budget: u64,
    labels: &mut Vec<u64>,
    pos: usize,
    max: u64,
    f: &mut impl FnMut(&[u64]),
) {
    if pos == labels.len() {
        f(labels);
        return;
    }
    let remaining: u64 = budget - labels[..pos].iter().sum::<u64>();
    let cap = max.min(remaining);
    for g in (0..=cap).rev() {
        labels[pos] = g;
        label_vectors(budget, labels, pos + 1, g, f);
        labels[pos] = 0;
    }
}

/// Minimal valence demanded by stability for a label.
fn min_valence(genus: u64) -> usize {
    match genus {
        0 => 3,
        1 => 1,
        _ => 0,
    }
}

/// Multisets of `count` edges over the vertex pairs (loops included),
/// pruned by the remaining valence deficit.
fn edge_multisets(labels: &[u64], count: usize, f: &mut impl FnMut(&[(usize, usize)])) {
    let v = labels.len();
    let mut pairs = Vec::new();
    for i in 0..v {
        for j in i..v {
            pairs.push((i, j));
        }
    }
    // largest pair index touching each vertex, for dead-branch detection
    let last_pair: Vec<usize> = (0..v)
        .map(|i| pairs.iter().rposition(|&(a, b)| a == i || b == i).unwrap())
        .collect();
    let mut walk = EdgeWalk {
        labels,
        pairs: &pairs,
        last_pair: &last_pair,
        valences: vec![0usize; v],
        chosen: Vec::with_capacity(count),
    };
    walk.run(0, count, f);
}

struct EdgeWalk<'a> {
    labels: &'a [u64],
    pairs: &'a [(usize, usize)],
    last_pair: &'a [usize],
    valences: Vec<usize>,
    chosen: Vec<(usize, usize)>,
}

impl EdgeWalk<'_> {
    fn run(&mut self, start: usize, remaining: usize, f: &mut impl FnMut(&[(usize, usize)])) {
        let deficit: usize = self
            .labels
            .iter()
            .zip(self.valences.iter())
            .map(|(&g, &val)| min_valence(g).saturating_sub(val))
            .sum();
        if deficit > 2 * remaining {
            return;
        }
        if remaining == 0 {
            if deficit == 0 {
                f(&self.chosen);
            }
            return;
        }
        for (i, &val) in self.valences.iter().enumerate() {
            if min_valence(self.labels[i]) > val && self.last_pair[i] < start {
                return; // vertex can no longer reach its minimum valence
            }
        }
        for p in start..self.pairs.len() {
            let (a, b) = self.pairs[p];
            self.valences[a] += 1;
            self.valences[b] += 1;
            self.chosen.push((a, b));
            self.run(p, remaining - 1, f);
            self.chosen.pop();
            self.valences[a] -= 1;
            self.valences[b] -= 1;
        }
    }
}

fn build(labels: &[u64], edges: &[(usize, usize)]) -> Option<FiberConfiguration> {
    let ids: Vec<ComponentId> = (0..labels.len())
        .map(|i| ComponentId::new(format!("v{i}")).expect("fixed charset"))
        .collect();
    let config = FiberConfiguration::new(
        FiberKind::StableCandidate,
        None,
        labels.iter().enumerate().map(|(i, &g)| {
            (
                ids[i].clone(),
                Component {
                    genus: g,
                    multiplicity: 1,
                },
            )
        }),
        edges.iter().map(|&(a, b)| (ids[a].clone(), ids[b].clone())),
    )
    .expect("well-formed by construction");
    config.is_connected().then_some(config)
}
