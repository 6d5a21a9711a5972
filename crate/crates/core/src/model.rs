//! Dual-graph model of the central fiber of a one-parameter degeneration.
//!
//! A fiber is a connected weighted multigraph: one vertex per irreducible
//! component (carrying the geometric genus of its normalization and its
//! multiplicity in the fiber divisor), one edge per node of the fiber.
//! Loops encode self-nodes of irreducible components and are only
//! meaningful once every multiplicity is 1.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Identifier of an irreducible component.
///
/// Ids are restricted to `[A-Za-z0-9_.-]+` so they survive every text
/// surface of the tool (fiber files, traces, DOT) unchanged. Generated
/// ids encode provenance, e.g. `C0.sheet2` or `C0-C1.chain1.3`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentId(String);

impl ComponentId {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        let ok = !id.is_empty()
            && id
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || b == b'-');
        if ok {
            Ok(ComponentId(id))
        } else {
            Err(ModelError::InvalidId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Numerical data of one irreducible component; the id lives in the
/// configuration that owns it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    /// Geometric genus of the normalization.
    pub genus: u64,
    /// Coefficient of the component in the fiber divisor; always >= 1.
    pub multiplicity: u64,
}

/// A node of the fiber: an unordered pair of component ids. Equal
/// endpoints form a loop (a self-node of an irreducible component).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    a: ComponentId,
    b: ComponentId,
}

impl Edge {
    /// Builds the edge with endpoints stored in sorted order.
    pub fn new(x: ComponentId, y: ComponentId) -> Self {
        if x <= y {
            Edge { a: x, b: y }
        } else {
            Edge { a: y, b: x }
        }
    }

    pub fn endpoints(&self) -> (&ComponentId, &ComponentId) {
        (&self.a, &self.b)
    }

    pub fn is_loop(&self) -> bool {
        self.a == self.b
    }

    /// The endpoint opposite to `id`, or `None` for loops and foreign edges.
    pub fn other(&self, id: &ComponentId) -> Option<&ComponentId> {
        if self.is_loop() {
            None
        } else if &self.a == id {
            Some(&self.b)
        } else if &self.b == id {
            Some(&self.a)
        } else {
            None
        }
    }

    pub fn touches(&self, id: &ComponentId) -> bool {
        &self.a == id || &self.b == id
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}--{}", self.a, self.b)
    }
}

/// Which stage of the reduction the configuration claims to be in.
///
/// Normal-crossings fibers have smooth components meeting transversally,
/// so loops are forbidden there; reduced and stable-candidate fibers have
/// every multiplicity equal to 1 and may carry loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberKind {
    NormalCrossings,
    Reduced,
    StableCandidate,
}

impl FiberKind {
    /// Kinds whose configurations must have all multiplicities 1.
    pub fn requires_reduced(self) -> bool {
        !matches!(self, FiberKind::NormalCrossings)
    }
}

impl fmt::Display for FiberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FiberKind::NormalCrossings => "normal-crossings",
            FiberKind::Reduced => "reduced",
            FiberKind::StableCandidate => "stable-candidate",
        };
        f.write_str(s)
    }
}

/// The central fiber as a weighted dual multigraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberConfiguration {
    kind: FiberKind,
    declared_genus: Option<u64>,
    components: BTreeMap<ComponentId, Component>,
    /// Sorted multiset of nodes; the position of an edge in this list is
    /// its index in descent files and traces.
    edges: Vec<Edge>,
}

impl FiberConfiguration {
    /// Assembles a configuration, rejecting structurally broken input
    /// (unknown edge endpoints, duplicate ids, zero multiplicities).
    /// Mathematical defects are left to [`FiberConfiguration::validate`].
    pub fn new(
        kind: FiberKind,
        declared_genus: Option<u64>,
        components: impl IntoIterator<Item = (ComponentId, Component)>,
        edges: impl IntoIterator<Item = (ComponentId, ComponentId)>,
    ) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for (id, comp) in components {
            if comp.multiplicity == 0 {
                return Err(ModelError::ZeroMultiplicity(id));
            }
            if map.insert(id.clone(), comp).is_some() {
                return Err(ModelError::DuplicateComponent(id));
            }
        }
        if map.is_empty() {
            return Err(ModelError::EmptyConfiguration);
        }
        let mut edge_list = Vec::new();
        for (x, y) in edges {
            for end in [&x, &y] {
                if !map.contains_key(end) {
                    return Err(ModelError::UnknownEndpoint(end.clone()));
                }
            }
            edge_list.push(Edge::new(x, y));
        }
        edge_list.sort();
        Ok(FiberConfiguration {
            kind,
            declared_genus,
            components: map,
            edges: edge_list,
        })
    }

    pub fn kind(&self) -> FiberKind {
        self.kind
    }

    pub(crate) fn set_kind(&mut self, kind: FiberKind) {
        self.kind = kind;
    }

    pub fn declared_genus(&self) -> Option<u64> {
        self.declared_genus
    }

    pub(crate) fn set_declared_genus(&mut self, genus: Option<u64>) {
        self.declared_genus = genus;
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Components in id order.
    pub fn components(&self) -> impl Iterator<Item = (&ComponentId, &Component)> {
        self.components.iter()
    }

    pub fn component_ids(&self) -> impl Iterator<Item = &ComponentId> {
        self.components.keys()
    }

    pub fn component(&self, id: &ComponentId) -> Option<&Component> {
        self.components.get(id)
    }

    pub fn contains(&self, id: &ComponentId) -> bool {
        self.components.contains_key(id)
    }

    /// Sorted node multiset; positions are the edge indices used by
    /// descent data.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of loops based at `id`.
    pub fn loops_at(&self, id: &ComponentId) -> usize {
        self.edges
            .iter()
            .filter(|e| e.is_loop() && e.touches(id))
            .count()
    }

    /// Valence of `id` with loops counted twice.
    pub fn valence(&self, id: &ComponentId) -> usize {
        self.edges
            .iter()
            .map(|e| match (e.touches(id), e.is_loop()) {
                (true, true) => 2,
                (true, false) => 1,
                _ => 0,
            })
            .sum()
    }

    /// Multiplicities of the opposite endpoints of the non-loop edges at
    /// `id`, summed exactly.
    pub(crate) fn neighbor_multiplicity_sum(&self, id: &ComponentId) -> i128 {
        self.edges
            .iter()
            .filter_map(|e| e.other(id))
            .map(|other| i128::from(self.components[other].multiplicity))
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        let start = match self.components.keys().next() {
            Some(id) => id,
            None => return false,
        };
        let mut seen: BTreeSet<&ComponentId> = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start);
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for e in &self.edges {
                // e.other is None on loops, which connect nothing
                if let Some(w) = e.other(v) {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        seen.len() == self.components.len()
    }

    /// First Betti number of the multigraph; meaningful once connected.
    pub fn first_betti_number(&self) -> i64 {
        self.edges.len() as i64 - self.components.len() as i64 + 1
    }

    /// Total-function validity check: every defect becomes a report
    /// entry, and the empty report means the configuration is usable by
    /// the rest of the engine.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        if !self.is_connected() {
            issues.push(ValidationIssue::Disconnected);
        }
        if self.kind == FiberKind::NormalCrossings {
            for e in &self.edges {
                if e.is_loop() {
                    issues.push(ValidationIssue::LoopInNormalCrossings {
                        id: e.endpoints().0.clone(),
                    });
                }
            }
        }
        if self.kind.requires_reduced() {
            for (id, comp) in &self.components {
                if comp.multiplicity != 1 {
                    issues.push(ValidationIssue::MultiplicityInReducedKind {
                        id: id.clone(),
                        multiplicity: comp.multiplicity,
                    });
                }
            }
        }
        if self.components.len() == 1 {
            let (id, comp) = self.components.iter().next().expect("nonempty");
            if comp.multiplicity > 1 {
                issues.push(ValidationIssue::MultipleFiber {
                    id: id.clone(),
                    multiplicity: comp.multiplicity,
                });
            }
        }
        let mut divisibility_ok = true;
        for (id, comp) in &self.components {
            let sum = self.neighbor_multiplicity_sum(id);
            if sum % i128::from(comp.multiplicity) != 0 {
                divisibility_ok = false;
                issues.push(ValidationIssue::NonIntegralSelfIntersection {
                    id: id.clone(),
                    multiplicity: comp.multiplicity,
                    neighbor_sum: sum,
                });
            }
        }
        if self.components.len() >= 2 {
            for (id, comp) in &self.components {
                let has_loop = self.loops_at(id) > 0;
                let has_real_edge = self.edges.iter().any(|e| e.touches(id) && !e.is_loop());
                if comp.genus == 0 && has_loop && !has_real_edge {
                    issues.push(ValidationIssue::RationalComponentOnlyLoops { id: id.clone() });
                }
            }
        }
        if divisibility_ok {
            // With integral self-intersections the adjunction genus is
            // defined; a negative value cannot come from a fiber of an
            // actual family.
            let mut weighted_canonical: i128 = 0;
            for (id, comp) in &self.components {
                let n = i128::from(comp.multiplicity);
                let e2 = -(self.neighbor_multiplicity_sum(id) / n);
                let loops = self.loops_at(id) as i128;
                let k_e = 2 * (i128::from(comp.genus) + loops) - 2 - e2;
                weighted_canonical = weighted_canonical.saturating_add(n.saturating_mul(k_e));
            }
            if weighted_canonical % 2 == 0 && 1 + weighted_canonical / 2 < 0 {
                issues.push(ValidationIssue::NegativeArithmeticGenus {
                    computed: 1 + weighted_canonical / 2,
                });
            }
        }
        if let Some(declared) = self.declared_genus {
            // The genus cross-check needs integral self-intersections and
            // a connected graph; skip it when those already failed.
            if divisibility_ok && issues.iter().all(|i| *i != ValidationIssue::Disconnected) {
                match crate::invariants::arithmetic_genus(self) {
                    Ok(computed) if computed != declared => {
                        issues.push(ValidationIssue::DeclaredGenusMismatch { declared, computed });
                    }
                    _ => {}
                }
            }
        }
        ValidationReport { issues }
    }

    /// Rebuilds the configuration with every id replaced through the
    /// given bijection. Used for isomorphism-invariance checks.
    pub fn relabel(
        &self,
        map: &BTreeMap<ComponentId, ComponentId>,
    ) -> Result<FiberConfiguration, ModelError> {
        let lookup = |id: &ComponentId| -> Result<ComponentId, ModelError> {
            map.get(id).cloned().ok_or(ModelError::RelabelNotTotal)
        };
        let mut components = Vec::new();
        for (id, comp) in &self.components {
            components.push((lookup(id)?, *comp));
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            let (x, y) = e.endpoints();
            edges.push((lookup(x)?, lookup(y)?));
        }
        let relabeled = FiberConfiguration::new(self.kind, self.declared_genus, components, edges)?;
        if relabeled.components.len() != self.components.len() {
            return Err(ModelError::RelabelNotInjective);
        }
        Ok(relabeled)
    }
}

/// A single defect found by [`FiberConfiguration::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    Disconnected,
    LoopInNormalCrossings {
        id: ComponentId,
    },
    MultiplicityInReducedKind {
        id: ComponentId,
        multiplicity: u64,
    },
    /// Single-component fiber with multiplicity > 1; reducing a multiple
    /// fiber needs data this model does not carry.
    MultipleFiber {
        id: ComponentId,
        multiplicity: u64,
    },
    /// The fiber relation forces n_E * E^2 = -(sum of neighbor
    /// multiplicities); the division must be exact.
    NonIntegralSelfIntersection {
        id: ComponentId,
        multiplicity: u64,
        neighbor_sum: i128,
    },
    /// Genus-0 component whose only incidences are its own loops inside a
    /// larger fiber; it necessarily disconnects the graph.
    RationalComponentOnlyLoops {
        id: ComponentId,
    },
    /// Adjunction on the intersection form gives a negative arithmetic
    /// genus: no actual degeneration has this dual graph.
    NegativeArithmeticGenus {
        computed: i128,
    },
    DeclaredGenusMismatch {
        declared: u64,
        computed: u64,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::Disconnected => write!(f, "configuration is not connected"),
            ValidationIssue::LoopInNormalCrossings { id } => {
                write!(f, "loop at {id} is not allowed in a normal-crossings fiber")
            }
            ValidationIssue::MultiplicityInReducedKind { id, multiplicity } => write!(
                f,
                "component {id} has multiplicity {multiplicity} in a fiber declared reduced"
            ),
            ValidationIssue::MultipleFiber { id, multiplicity } => write!(
                f,
                "single component {id} with multiplicity {multiplicity}: multiple fibers are unsupported"
            ),
            ValidationIssue::NonIntegralSelfIntersection {
                id,
                multiplicity,
                neighbor_sum,
            } => write!(
                f,
                "non-integral self-intersection at {id}: multiplicity {multiplicity} does not divide neighbor sum {neighbor_sum}"
            ),
            ValidationIssue::RationalComponentOnlyLoops { id } => write!(
                f,
                "genus-0 component {id} meets the fiber only through its own loops"
            ),
            ValidationIssue::NegativeArithmeticGenus { computed } => write!(
                f,
                "intersection form gives negative arithmetic genus {computed}"
            ),
            ValidationIssue::DeclaredGenusMismatch { declared, computed } => write!(
                f,
                "declared genus {declared} does not match computed arithmetic genus {computed}"
            ),
        }
    }
}

/// Outcome of validating a configuration; valid iff no issues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn issues(&self) -> &[ValidationIssue] {
        &self.issues
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            write!(f, "valid")
        } else {
            for (i, issue) in self.issues.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "{issue}")?;
            }
            Ok(())
        }
    }
}

/// Errors of the graph model itself.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid component id {0:?}: ids match [A-Za-z0-9_.-]+")]
    InvalidId(String),
    #[error("duplicate component id {0}")]
    DuplicateComponent(ComponentId),
    #[error("node endpoint {0} is not a declared component")]
    UnknownEndpoint(ComponentId),
    #[error("component {0} has multiplicity 0")]
    ZeroMultiplicity(ComponentId),
    #[error("a fiber needs at least one component")]
    EmptyConfiguration,
    #[error("non-integral self-intersection at {id}: multiplicity {multiplicity} does not divide neighbor sum {neighbor_sum}")]
    NonIntegralSelfIntersection {
        id: ComponentId,
        multiplicity: u64,
        neighbor_sum: i128,
    },
    #[error("operation requires kind {expected}, configuration has {found}")]
    WrongKind {
        expected: &'static str,
        found: FiberKind,
    },
    #[error("operation requires a valid configuration: {0}")]
    InvalidConfiguration(ValidationReport),
    #[error("relabeling map does not cover every component")]
    RelabelNotTotal,
    #[error("relabeling map is not injective")]
    RelabelNotInjective,
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

impl ModelError {
    /// Guard for operations whose contract demands a valid configuration.
    pub(crate) fn require_valid(config: &FiberConfiguration) -> Result<(), ModelError> {
        let report = config.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(ModelError::InvalidConfiguration(report))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cid(s: &str) -> ComponentId {
        ComponentId::new(s).unwrap()
    }

    fn comp(genus: u64, multiplicity: u64) -> Component {
        Component {
            genus,
            multiplicity,
        }
    }

    #[test]
    fn smooth_fiber_is_valid() {
        let config = FiberConfiguration::new(
            FiberKind::NormalCrossings,
            None,
            [(cid("C0"), comp(2, 1))],
            [],
        )
        .unwrap();
        assert!(config.validate().is_valid());
    }

    #[test]
    fn divisibility_failure_is_reported() {
        // center of multiplicity 2 with three multiplicity-1 tails:
        // 2 must divide 3, so E^2 is not an integer.
        let config = FiberConfiguration::new(
            FiberKind::NormalCrossings,
            None,
            [
                (cid("C"), comp(0, 2)),
                (cid("T0"), comp(0, 1)),
                (cid("T1"), comp(0, 1)),
                (cid("T2"), comp(0, 1)),
            ],
            [
                (cid("C"), cid("T0")),
                (cid("C"), cid("T1")),
                (cid("C"), cid("T2")),
            ],
        )
        .unwrap();
        let report = config.validate();
        assert!(!report.is_valid());
        assert!(report.issues().iter().any(|i| matches!(
            i,
            ValidationIssue::NonIntegralSelfIntersection { id, .. } if id == &cid("C")
        )));
    }

    #[test]
    fn reduced_pair_is_valid() {
        let config = FiberConfiguration::new(
            FiberKind::Reduced,
            None,
            [(cid("A"), comp(1, 1)), (cid("B"), comp(1, 1))],
            [(cid("A"), cid("B"))],
        )
        .unwrap();
        assert!(config.validate().is_valid());
    }

    #[test]
    fn loops_rejected_in_normal_crossings() {
        let config = FiberConfiguration::new(
            FiberKind::NormalCrossings,
            None,
            [(cid("A"), comp(1, 1)), (cid("B"), comp(0, 1))],
            [(cid("A"), cid("B")), (cid("B"), cid("B"))],
        )
        .unwrap();
        let report = config.validate();
        assert!(report
            .issues()
            .iter()
            .any(|i| matches!(i, ValidationIssue::LoopInNormalCrossings { .. })));
    }

    #[test]
    fn multiplicity_rejected_in_reduced() {
        let config = FiberConfiguration::new(
            FiberKind::Reduced,
            None,
            [(cid("A"), comp(1, 2)), (cid("B"), comp(1, 1))],
            [(cid("A"), cid("B")), (cid("A"), cid("B"))],
        )
        .unwrap();
        assert!(config
            .validate()
            .issues()
            .iter()
            .any(|i| matches!(i, ValidationIssue::MultiplicityInReducedKind { .. })));
    }

    #[test]
    fn multiple_fiber_rejected() {
        let config = FiberConfiguration::new(
            FiberKind::NormalCrossings,
            None,
            [(cid("A"), comp(1, 3))],
            [],
        )
        .unwrap();
        assert!(config
            .validate()
            .issues()
            .iter()
            .any(|i| matches!(i, ValidationIssue::MultipleFiber { .. })));
    }

    #[test]
    fn disconnected_reported() {
        let config = FiberConfiguration::new(
            FiberKind::Reduced,
            None,
            [(cid("A"), comp(1, 1)), (cid("B"), comp(1, 1))],
            [],
        )
        .unwrap();
        assert!(config
            .validate()
            .issues()
            .contains(&ValidationIssue::Disconnected));
    }

    #[test]
    fn declared_genus_checked() {
        let config =
            FiberConfiguration::new(FiberKind::Reduced, Some(3), [(cid("A"), comp(2, 1))], [])
                .unwrap();
        assert!(config.validate().issues().iter().any(|i| matches!(
            i,
            ValidationIssue::DeclaredGenusMismatch {
                declared: 3,
                computed: 2
            }
        )));
    }

    #[test]
    fn rational_component_with_only_loops_is_reported() {
        let config = FiberConfiguration::new(
            FiberKind::Reduced,
            None,
            [(cid("A"), comp(0, 1)), (cid("G"), comp(2, 1))],
            [(cid("A"), cid("A")), (cid("A"), cid("A"))],
        )
        .unwrap();
        let report = config.validate();
        assert!(report.issues().contains(&ValidationIssue::Disconnected));
        assert!(report.issues().iter().any(
            |i| matches!(i, ValidationIssue::RationalComponentOnlyLoops { id } if id == &cid("A"))
        ));

        // a single rational component with two self-nodes is a stable
        // genus-2 curve, not a defect
        let solo = FiberConfiguration::new(
            FiberKind::Reduced,
            None,
            [(cid("A"), comp(0, 1))],
            [(cid("A"), cid("A")), (cid("A"), cid("A"))],
        )
        .unwrap();
        assert!(solo.validate().is_valid());
        assert!(crate::invariants::stability_report(&solo).unwrap().stable);
    }

    #[test]
    fn negative_adjunction_genus_is_reported() {
        // two multiplicity-2 rational components joined once: the
        // intersection form forces p_a = -1
        let config = FiberConfiguration::new(
            FiberKind::NormalCrossings,
            None,
            [(cid("A"), comp(0, 2)), (cid("B"), comp(0, 2))],
            [(cid("A"), cid("B"))],
        )
        .unwrap();
        assert!(config
            .validate()
            .issues()
            .iter()
            .any(|i| matches!(i, ValidationIssue::NegativeArithmeticGenus { computed: -1 })));
    }

    #[test]
    fn unknown_endpoint_rejected_at_construction() {
        let err = FiberConfiguration::new(
            FiberKind::Reduced,
            None,
            [(cid("A"), comp(1, 1))],
            [(cid("A"), cid("Z"))],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::UnknownEndpoint(_)));
    }

    #[test]
    fn valence_counts_loops_twice() {
        let config = FiberConfiguration::new(
            FiberKind::Reduced,
            None,
            [(cid("A"), comp(0, 1)), (cid("B"), comp(1, 1))],
            [(cid("A"), cid("B")), (cid("A"), cid("A"))],
        )
        .unwrap();
        assert_eq!(config.valence(&cid("A")), 3);
        assert_eq!(config.loops_at(&cid("A")), 1);
        assert_eq!(config.valence(&cid("B")), 1);
    }

    #[test]
    fn id_charset_enforced() {
        assert!(ComponentId::new("C0.sheet2").is_ok());
        assert!(ComponentId::new("C0-C1.chain1.3").is_ok());
        assert!(ComponentId::new("").is_err());
        assert!(ComponentId::new("a b").is_err());
        assert!(ComponentId::new("café").is_err());
    }
}
