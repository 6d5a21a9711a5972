//! Canonical byte form of a configuration, invariant under relabeling.
//!
//! The form is the minimum, over all orderings of the components, of a
//! row-per-component serialization: each row carries the component's
//! labels (genus, multiplicity, loop count) followed by its edge
//! multiplicities towards the components already placed. Two
//! configurations have equal forms exactly when they are isomorphic as
//! genus- and multiplicity-labeled multigraphs.
//!
//! The search is a depth-first minimization with prefix pruning; twin
//! components (interchangeable by an automorphism fixing everything
//! else) are expanded only once per branch point. Intended for desk
//! scale: at most [`MAX_CANONICAL_COMPONENTS`] components.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::model::FiberConfiguration;

/// Hard bound on the number of components the minimizer accepts.
pub const MAX_CANONICAL_COMPONENTS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("configuration has {count} components, canonical form is bounded at {MAX_CANONICAL_COMPONENTS}")]
    TooLarge { count: usize },
}

/// One serialized row: labels of the component placed at this position
/// and its adjacency data towards earlier positions. Field order is the
/// comparison order. `L` describes loops, `C` the connection to one
/// earlier component; the public form uses plain counts for both.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Row<C, L> {
    genus: u64,
    multiplicity: u64,
    loops: L,
    counts: Vec<C>,
}

struct Minimizer<C, L> {
    n: usize,
    genus: Vec<u64>,
    multiplicity: Vec<u64>,
    loops: Vec<L>,
    adj: Vec<Vec<C>>,
    placed: Vec<usize>,
    used: Vec<bool>,
    rows: Vec<Row<C, L>>,
    best: Option<Vec<Row<C, L>>>,
}

impl<C: Ord + Clone, L: Ord + Clone> Minimizer<C, L> {
    fn new(genus: Vec<u64>, multiplicity: Vec<u64>, loops: Vec<L>, adj: Vec<Vec<C>>) -> Self {
        let n = genus.len();
        Minimizer {
            n,
            genus,
            multiplicity,
            loops,
            adj,
            placed: Vec::with_capacity(n),
            used: vec![false; n],
            rows: Vec::with_capacity(n),
            best: None,
        }
    }

    fn row_for(&self, v: usize) -> Row<C, L> {
        Row {
            genus: self.genus[v],
            multiplicity: self.multiplicity[v],
            loops: self.loops[v].clone(),
            counts: self
                .placed
                .iter()
                .map(|&q| self.adj[v][q].clone())
                .collect(),
        }
    }

    /// Swapping two unused components is an automorphism when their
    /// labels agree and they see every other component identically.
    fn twins(&self, v: usize, w: usize) -> bool {
        self.genus[v] == self.genus[w]
            && self.multiplicity[v] == self.multiplicity[w]
            && self.loops[v] == self.loops[w]
            && (0..self.n)
                .filter(|&x| x != v && x != w)
                .all(|x| self.adj[v][x] == self.adj[w][x])
    }

    /// Compares the candidate prefix `rows + [row]` against the current
    /// best; `Greater` prunes the branch.
    fn prefix_cmp(&self, row: &Row<C, L>) -> Ordering {
        let best = match &self.best {
            Some(best) => best,
            None => return Ordering::Less,
        };
        for (lhs, rhs) in self.rows.iter().chain(std::iter::once(row)).zip(best) {
            match lhs.cmp(rhs) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }

    fn search(&mut self) {
        if self.placed.len() == self.n {
            let better = match &self.best {
                None => true,
                Some(best) => self.rows.as_slice() < best.as_slice(),
            };
            if better {
                self.best = Some(self.rows.clone());
            }
            return;
        }
        let unused: Vec<usize> = (0..self.n).filter(|&v| !self.used[v]).collect();
        let mut ranked: Vec<(Row<C, L>, usize)> = unused
            .iter()
            .filter(|&&w| !unused.iter().any(|&v| v < w && self.twins(v, w)))
            .map(|&v| (self.row_for(v), v))
            .collect();
        ranked.sort();
        for (row, v) in ranked {
            if self.prefix_cmp(&row) == Ordering::Greater {
                continue;
            }
            self.used[v] = true;
            self.placed.push(v);
            self.rows.push(row);
            self.search();
            self.rows.pop();
            self.placed.pop();
            self.used[v] = false;
        }
    }

    fn minimize(mut self) -> Vec<Row<C, L>> {
        self.search();
        self.best.expect("nonempty vertex set")
    }
}

impl fmt::Display for Row<u32, u32> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}n{}l{}[", self.genus, self.multiplicity, self.loops)?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Canonical serialization of the labeled multigraph underlying the
/// configuration. The kind tag and declared genus are metadata about the
/// reduction stage, not graph structure, and do not enter the form.
pub fn canonical_form(config: &FiberConfiguration) -> Result<String, CanonError> {
    let count = config.component_count();
    if count > MAX_CANONICAL_COMPONENTS {
        return Err(CanonError::TooLarge { count });
    }
    let ids: Vec<_> = config.component_ids().cloned().collect();
    let index = |id: &crate::model::ComponentId| ids.binary_search(id).expect("own id");
    let mut genus = Vec::with_capacity(count);
    let mut multiplicity = Vec::with_capacity(count);
    for (_, comp) in config.components() {
        genus.push(comp.genus);
        multiplicity.push(comp.multiplicity);
    }
    let mut loops = vec![0u32; count];
    let mut adj = vec![vec![0u32; count]; count];
    for e in config.edges() {
        let (x, y) = e.endpoints();
        let (i, j) = (index(x), index(y));
        if i == j {
            loops[i] += 1;
        } else {
            adj[i][j] += 1;
            adj[j][i] += 1;
        }
    }
    let rows = Minimizer::new(genus, multiplicity, loops, adj).minimize();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        out.push_str(&row.to_string());
    }
    Ok(out)
}

/// Canonical key of a multigraph whose edges and loops carry sorted
/// color multisets. Used internally to compare base-change outputs after
/// suppressing their rational chains into edge colors; the key is opaque
/// and only meaningful for equality.
pub(crate) fn colored_canonical_key(
    labels: Vec<(u64, u64)>,
    loop_colors: Vec<Vec<u32>>,
    adj_colors: Vec<Vec<Vec<u32>>>,
) -> String {
    let (genus, multiplicity) = labels.into_iter().unzip();
    let rows = Minimizer::new(genus, multiplicity, loop_colors, adj_colors).minimize();
    let mut out = String::new();
    for row in rows {
        out.push_str(&format!(
            "g{}n{}l{:?}{:?};",
            row.genus, row.multiplicity, row.loops, row.counts
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::model::{Component, ComponentId, FiberKind};

    fn cid(s: &str) -> ComponentId {
        ComponentId::new(s).unwrap()
    }

    fn comp(genus: u64, multiplicity: u64) -> Component {
        Component {
            genus,
            multiplicity,
        }
    }

    fn theta(a: &str, b: &str) -> FiberConfiguration {
        FiberConfiguration::new(
            FiberKind::Reduced,
            None,
            [(cid(a), comp(0, 1)), (cid(b), comp(0, 1))],
            [(cid(a), cid(b)), (cid(a), cid(b)), (cid(a), cid(b))],
        )
        .unwrap()
    }

    fn dumbbell() -> FiberConfiguration {
        FiberConfiguration::new(
            FiberKind::Reduced,
            None,
            [(cid("A"), comp(0, 1)), (cid("B"), comp(0, 1))],
            [
                (cid("A"), cid("B")),
                (cid("A"), cid("A")),
                (cid("B"), cid("B")),
            ],
        )
        .unwrap()
    }

    #[test]
    fn theta_form_is_label_independent() {
        assert_eq!(
            canonical_form(&theta("A", "B")).unwrap(),
            canonical_form(&theta("zz", "aa")).unwrap()
        );
    }

    #[test]
    fn theta_and_dumbbell_differ() {
        assert_ne!(
            canonical_form(&theta("A", "B")).unwrap(),
            canonical_form(&dumbbell()).unwrap()
        );
    }

    #[test]
    fn single_vertex_forms_differ_by_labels() {
        let smooth =
            FiberConfiguration::new(FiberKind::Reduced, None, [(cid("X"), comp(2, 1))], [])
                .unwrap();
        let nodal = FiberConfiguration::new(
            FiberKind::Reduced,
            None,
            [(cid("X"), comp(1, 1))],
            [(cid("X"), cid("X"))],
        )
        .unwrap();
        assert_ne!(
            canonical_form(&smooth).unwrap(),
            canonical_form(&nodal).unwrap()
        );
    }

    #[test]
    fn relabeling_is_a_congruence() {
        let config = FiberConfiguration::new(
            FiberKind::Reduced,
            None,
            [
                (cid("A"), comp(1, 1)),
                (cid("B"), comp(0, 1)),
                (cid("C"), comp(0, 1)),
            ],
            [
                (cid("A"), cid("B")),
                (cid("B"), cid("C")),
                (cid("B"), cid("C")),
                (cid("C"), cid("C")),
            ],
        )
        .unwrap();
        let map: BTreeMap<_, _> = [
            (cid("A"), cid("q7")),
            (cid("B"), cid("q1")),
            (cid("C"), cid("q4")),
        ]
        .into();
        let relabeled = config.relabel(&map).unwrap();
        assert_eq!(
            canonical_form(&config).unwrap(),
            canonical_form(&relabeled).unwrap()
        );
    }

    #[test]
    fn size_bound_enforced() {
        let comps: Vec<_> = (0..13)
            .map(|i| (cid(&format!("c{i:02}")), comp(0, 1)))
            .collect();
        let edges: Vec<_> = (0..12)
            .map(|i| (cid(&format!("c{i:02}")), cid(&format!("c{:02}", i + 1))))
            .collect();
        let config = FiberConfiguration::new(FiberKind::Reduced, None, comps, edges).unwrap();
        assert!(matches!(
            canonical_form(&config),
            Err(CanonError::TooLarge { count: 13 })
        ));
    }

    #[test]
    fn symmetric_cycle_is_fast_and_stable() {
        // 12-cycle of identical rational components: heavy symmetry.
        let comps: Vec<_> = (0..12)
            .map(|i| (cid(&format!("c{i:02}")), comp(0, 1)))
            .collect();
        let edges: Vec<_> = (0..12)
            .map(|i| {
                (
                    cid(&format!("c{i:02}")),
                    cid(&format!("c{:02}", (i + 1) % 12)),
                )
            })
            .collect();
        let config = FiberConfiguration::new(FiberKind::Reduced, None, comps, edges).unwrap();
        let form = canonical_form(&config).unwrap();
        // Rotating the labels is an isomorphism.
        let map: BTreeMap<_, _> = (0..12)
            .map(|i| {
                (
                    cid(&format!("c{i:02}")),
                    cid(&format!("c{:02}", (i + 5) % 12)),
                )
            })
            .collect();
        assert_eq!(
            form,
            canonical_form(&config.relabel(&map).unwrap()).unwrap()
        );
    }

    #[test]
    fn colored_key_distinguishes_colors() {
        let a = colored_canonical_key(
            vec![(0, 1), (0, 1)],
            vec![vec![], vec![]],
            vec![vec![vec![], vec![1]], vec![vec![1], vec![]]],
        );
        let b = colored_canonical_key(
            vec![(0, 1), (0, 1)],
            vec![vec![], vec![]],
            vec![vec![vec![], vec![2]], vec![vec![2], vec![]]],
        );
        assert_ne!(a, b);
    }
}
