//! Global base change t -> t^N on a fiber configuration.
//!
//! Locally the effect is fully determined (see [`crate::local`]): a
//! component of multiplicity a splits into sheets of exponent N/a, and a
//! node of multiplicities (a, b) splits into gcd(a, b) branches, each
//! resolved into a chain of N/lcm(a, b) - 1 rational curves. What the
//! local picture does not determine is the global monodromy: how the
//! sheets over each component assemble into connected covers, and which
//! branch ends meet which cover. That gluing is the descent datum. It is
//! explicit input here; [`search_descent`] enumerates the finitely many
//! candidates and keeps the consistent ones.
//!
//! Ramification is not negotiable: over a node the cover of the
//! (a)-side is ramified with index a / gcd(a, b) at every point, so each
//! cover piece has its genus pinned by Riemann-Hurwitz and its degree
//! constrained to a multiple of [`piece_degree_unit`]. Arithmetic genus
//! conservation is re-checked on every application rather than assumed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::canon::colored_canonical_key;
use crate::invariants::arithmetic_genus;
use crate::local::node_base_change;
use crate::model::{Component, ComponentId, FiberConfiguration, FiberKind, ModelError};
use crate::trace::{Move, MoveTrace, PieceRecord};

/// Search bound: configurations accepted by [`search_descent`].
pub const MAX_SEARCH_COMPONENTS: usize = 12;
/// Search bound: degree partitions per component.
pub const MAX_PARTITIONS_PER_COMPONENT: usize = 64;
/// Search bound: matching combinations per edge set.
pub const MAX_MATCHINGS: u128 = 10_000;
/// Safety bound: total candidates the search will ever evaluate.
pub const MAX_SEARCH_CANDIDATES: u64 = 1_000_000;
/// Internal bound: anchor vertices in the dedup key of an output graph.
const MAX_DEDUP_ANCHORS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaseChangeError {
    #[error("unknown component {0}")]
    UnknownComponent(ComponentId),
    #[error(
        "cover piece of degree {degree} over {id} has no integral Riemann-Hurwitz genus: {detail}"
    )]
    NonIntegralGenus {
        id: ComponentId,
        degree: u64,
        detail: String,
    },
    #[error(
        "cover piece of degree {degree} over {id} would have negative genus (2g-2 = {doubled})"
    )]
    NegativeGenus {
        id: ComponentId,
        degree: u64,
        doubled: i128,
    },
    #[error("base exponent {base_exponent} is not a multiple of the multiplicity lcm {lcm}")]
    NotDivisible { lcm: u64, base_exponent: u64 },
    #[error("inconsistent descent data:\n{0}")]
    InvalidDescent(DescentReport),
    #[error("GenusNotConserved: base change changed arithmetic genus from {input} to {output}")]
    GenusNotConserved { input: u64, output: u64 },
    #[error("search bound exceeded: {bound} ({detail})")]
    BoundExceeded { bound: &'static str, detail: String },
    #[error("no consistent descent datum found for the requested base exponent")]
    NoConsistentDescent,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One connected piece of the preimage cover of a component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverPiece {
    pub parent: ComponentId,
    /// Covering degree over the parent; a multiple of the parent's
    /// [`piece_degree_unit`].
    pub degree: u64,
    /// Genus forced by Riemann-Hurwitz.
    pub genus: u64,
    /// Points of this piece over each incident edge (by edge index),
    /// counted per edge end: degree * gcd(n_parent, n_other) / n_parent.
    pub points_over_edge: BTreeMap<usize, u64>,
}

/// Global gluing datum for a base change t -> t^N.
///
/// `pieces` fixes, for every component, the ordered degrees of its cover
/// pieces (summing to the multiplicity). `matchings` fixes, per edge
/// index, which piece each branch end attaches to; edges without an
/// entry use index order on both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentData {
    base_exponent: u64,
    pieces: BTreeMap<ComponentId, Vec<u64>>,
    matchings: BTreeMap<usize, Vec<(usize, usize)>>,
}

impl DescentData {
    pub fn new(
        base_exponent: u64,
        pieces: BTreeMap<ComponentId, Vec<u64>>,
        matchings: BTreeMap<usize, Vec<(usize, usize)>>,
    ) -> Self {
        DescentData {
            base_exponent,
            pieces,
            matchings,
        }
    }

    /// The most connected datum: one full-degree piece per component,
    /// matchings in index order. On an all-multiplicity-1 configuration
    /// this is the only datum there is.
    pub fn trivial(config: &FiberConfiguration, base_exponent: u64) -> Self {
        let pieces = config
            .components()
            .map(|(id, comp)| (id.clone(), vec![comp.multiplicity]))
            .collect();
        DescentData {
            base_exponent,
            pieces,
            matchings: BTreeMap::new(),
        }
    }

    pub fn base_exponent(&self) -> u64 {
        self.base_exponent
    }

    pub fn piece_degrees(&self, id: &ComponentId) -> Option<&[u64]> {
        self.pieces.get(id).map(|v| v.as_slice())
    }

    pub fn covers(&self) -> impl Iterator<Item = (&ComponentId, &[u64])> {
        self.pieces.iter().map(|(id, v)| (id, v.as_slice()))
    }

    pub fn matching(&self, edge: usize) -> Option<&[(usize, usize)]> {
        self.matchings.get(&edge).map(|v| v.as_slice())
    }

    pub fn matchings(&self) -> impl Iterator<Item = (usize, &[(usize, usize)])> {
        self.matchings.iter().map(|(&e, v)| (e, v.as_slice()))
    }
}

/// A single inconsistency in a descent datum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DescentIssue {
    ZeroBaseExponent,
    BaseExponentNotDivisible {
        lcm: u64,
        base_exponent: u64,
    },
    UnknownComponent(ComponentId),
    UnknownEdge {
        index: usize,
    },
    MissingCover {
        id: ComponentId,
    },
    ZeroPieceDegree {
        id: ComponentId,
        piece: usize,
    },
    PieceDegreeNotMultiple {
        id: ComponentId,
        piece: usize,
        degree: u64,
        unit: u64,
    },
    DegreeSumMismatch {
        id: ComponentId,
        total: u64,
        multiplicity: u64,
    },
    /// The Riemann-Hurwitz genus of a declared piece is negative or
    /// fractional: no cover with these numbers exists, so the descent
    /// cannot conserve the genus.
    ImpossiblePieceGenus {
        id: ComponentId,
        piece: usize,
        degree: u64,
        reason: String,
    },
    MatchingBranchCount {
        edge: usize,
        expected: u64,
        found: usize,
    },
    MatchingPieceOutOfRange {
        edge: usize,
        branch: usize,
        side: &'static str,
        piece: usize,
    },
    MatchingSlotsUnbalanced {
        edge: usize,
        id: ComponentId,
        piece: usize,
        used: u64,
        slots: u64,
    },
    Disconnected,
}

impl fmt::Display for DescentIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DescentIssue::ZeroBaseExponent => write!(f, "base exponent must be positive"),
            DescentIssue::BaseExponentNotDivisible { lcm, base_exponent } => write!(
                f,
                "base exponent {base_exponent} is not a multiple of the multiplicity lcm {lcm}"
            ),
            DescentIssue::UnknownComponent(id) => {
                write!(f, "descent mentions unknown component {id}")
            }
            DescentIssue::UnknownEdge { index } => {
                write!(f, "descent mentions unknown edge index {index}")
            }
            DescentIssue::MissingCover { id } => {
                write!(f, "no cover pieces declared for component {id}")
            }
            DescentIssue::ZeroPieceDegree { id, piece } => {
                write!(f, "piece {piece} over {id} has degree 0")
            }
            DescentIssue::PieceDegreeNotMultiple {
                id,
                piece,
                degree,
                unit,
            } => write!(
                f,
                "piece {piece} over {id} has degree {degree}, not a multiple of the ramification unit {unit}"
            ),
            DescentIssue::DegreeSumMismatch {
                id,
                total,
                multiplicity,
            } => write!(
                f,
                "piece degrees over {id} sum to {total}, expected the multiplicity {multiplicity}"
            ),
            DescentIssue::ImpossiblePieceGenus {
                id,
                piece,
                degree,
                reason,
            } => write!(
                f,
                "GenusNotConserved: piece {piece} over {id} (degree {degree}) is impossible: {reason}"
            ),
            DescentIssue::MatchingBranchCount {
                edge,
                expected,
                found,
            } => write!(
                f,
                "edge {edge}: matching lists {found} branches, the local model gives {expected}"
            ),
            DescentIssue::MatchingPieceOutOfRange {
                edge,
                branch,
                side,
                piece,
            } => write!(
                f,
                "edge {edge}, branch {branch}: {side} piece index {piece} is out of range"
            ),
            DescentIssue::MatchingSlotsUnbalanced {
                edge,
                id,
                piece,
                used,
                slots,
            } => write!(
                f,
                "edge {edge}: piece {piece} over {id} is used {used} times but offers {slots} branch points"
            ),
            DescentIssue::Disconnected => write!(f, "glued cover is disconnected"),
        }
    }
}

/// Outcome of validating a descent datum; valid iff no issues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentReport {
    issues: Vec<DescentIssue>,
}

impl DescentReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn issues(&self) -> &[DescentIssue] {
        &self.issues
    }

    /// True when some issue is a geometric impossibility rather than a
    /// malformed datum.
    pub fn has_geometric_issue(&self) -> bool {
        self.issues.iter().any(|i| {
            matches!(
                i,
                DescentIssue::ImpossiblePieceGenus { .. } | DescentIssue::Disconnected
            )
        })
    }
}

impl fmt::Display for DescentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            write!(f, "consistent")
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

/// Every admissible piece degree over a component is a multiple of this
/// unit: the lcm over incident edges of n_E / gcd(n_E, n_other). The
/// unit always divides the multiplicity.
pub fn piece_degree_unit(
    config: &FiberConfiguration,
    id: &ComponentId,
) -> Result<u64, BaseChangeError> {
    let comp = config
        .component(id)
        .ok_or_else(|| BaseChangeError::UnknownComponent(id.clone()))?;
    let n = comp.multiplicity;
    let mut unit = 1u64;
    for e in config.edges() {
        if let Some(other) = e.other(id) {
            let m = config
                .component(other)
                .expect("edge endpoints exist")
                .multiplicity;
            unit = unit.lcm(&(n / n.gcd(&m)));
        }
    }
    Ok(unit)
}

/// Genus of a connected degree-`degree` piece of the cyclic cover over a
/// component, via Riemann-Hurwitz with the ramification indices forced
/// by the local model:
///
/// ```text
/// 2g' - 2 = degree * (2g - 2) + sum over edge ends of (degree/r)(r - 1)
/// ```
///
/// where r = n_E / gcd(n_E, n_other) at each end. Loops sit on the
/// component itself (both multiplicities equal), so they are unramified
/// and contribute nothing.
pub fn piece_genus(
    config: &FiberConfiguration,
    id: &ComponentId,
    degree: u64,
) -> Result<u64, BaseChangeError> {
    let comp = config
        .component(id)
        .ok_or_else(|| BaseChangeError::UnknownComponent(id.clone()))?;
    if degree == 0 {
        return Err(BaseChangeError::NonIntegralGenus {
            id: id.clone(),
            degree,
            detail: "degree must be positive".to_string(),
        });
    }
    let n = comp.multiplicity;
    let overflow = || BaseChangeError::NonIntegralGenus {
        id: id.clone(),
        degree,
        detail: "Riemann-Hurwitz total overflows".to_string(),
    };
    let mut doubled: i128 = i128::from(degree)
        .checked_mul(2 * i128::from(comp.genus) - 2)
        .ok_or_else(overflow)?;
    for e in config.edges() {
        if let Some(other) = e.other(id) {
            let m = config
                .component(other)
                .expect("edge endpoints exist")
                .multiplicity;
            let r = n / n.gcd(&m);
            if !degree.is_multiple_of(r) {
                return Err(BaseChangeError::NonIntegralGenus {
                    id: id.clone(),
                    degree,
                    detail: format!("ramification index {r} does not divide the degree"),
                });
            }
            let term = i128::from(degree / r)
                .checked_mul(i128::from(r - 1))
                .ok_or_else(overflow)?;
            doubled = doubled.checked_add(term).ok_or_else(overflow)?;
        }
    }
    if doubled % 2 != 0 {
        return Err(BaseChangeError::NonIntegralGenus {
            id: id.clone(),
            degree,
            detail: format!("Riemann-Hurwitz total {doubled} is odd"),
        });
    }
    if doubled + 2 < 0 {
        return Err(BaseChangeError::NegativeGenus {
            id: id.clone(),
            degree,
            doubled,
        });
    }
    Ok(((doubled + 2) / 2) as u64)
}

/// Resolves the full cover-piece data (degrees, genera, branch points)
/// a descent datum declares over each component.
pub fn cover_pieces(
    config: &FiberConfiguration,
    descent: &DescentData,
) -> Result<BTreeMap<ComponentId, Vec<CoverPiece>>, BaseChangeError> {
    let mut out = BTreeMap::new();
    for (id, comp) in config.components() {
        let degrees = descent
            .piece_degrees(id)
            .ok_or_else(|| BaseChangeError::UnknownComponent(id.clone()))?;
        let n = comp.multiplicity;
        let mut pieces = Vec::with_capacity(degrees.len());
        for &degree in degrees {
            let genus = piece_genus(config, id, degree)?;
            let mut points = BTreeMap::new();
            for (idx, e) in config.edges().iter().enumerate() {
                if let Some(other) = e.other(id) {
                    let m = config
                        .component(other)
                        .expect("edge endpoints exist")
                        .multiplicity;
                    points.insert(idx, degree * n.gcd(&m) / n);
                } else if e.is_loop() && e.touches(id) {
                    // unramified on both ends; one full fiber per end
                    points.insert(idx, degree);
                }
            }
            pieces.push(CoverPiece {
                parent: id.clone(),
                degree,
                genus,
                points_over_edge: points,
            });
        }
        out.insert(id.clone(), pieces);
    }
    Ok(out)
}

fn multiplicity_lcm(config: &FiberConfiguration) -> u64 {
    config
        .components()
        .fold(1u64, |acc, (_, c)| acc.lcm(&c.multiplicity))
}

/// Branch points a piece of the given degree offers per end of an edge.
fn slots_per_end(degree: u64, n_self: u64, n_other: u64) -> Option<u64> {
    let g = n_self.gcd(&n_other);
    let total = degree.checked_mul(g)?;
    (total % n_self == 0).then(|| total / n_self)
}

/// Checks every structural and geometric constraint a descent datum must
/// satisfy against the configuration; the glued graph is additionally
/// required to be connected. All violations are collected into a report.
pub fn validate_descent(config: &FiberConfiguration, descent: &DescentData) -> DescentReport {
    let mut issues = Vec::new();
    let n = descent.base_exponent;
    if n == 0 {
        issues.push(DescentIssue::ZeroBaseExponent);
    }
    let lcm = multiplicity_lcm(config);
    if n > 0 && !n.is_multiple_of(lcm) {
        issues.push(DescentIssue::BaseExponentNotDivisible {
            lcm,
            base_exponent: n,
        });
    }
    for (id, _) in descent.covers() {
        if !config.contains(id) {
            issues.push(DescentIssue::UnknownComponent(id.clone()));
        }
    }
    for (edge, _) in descent.matchings() {
        if edge >= config.edge_count() {
            issues.push(DescentIssue::UnknownEdge { index: edge });
        }
    }

    let mut degrees_ok: BTreeMap<&ComponentId, bool> = BTreeMap::new();
    for (id, comp) in config.components() {
        let degrees = match descent.piece_degrees(id) {
            Some(d) if !d.is_empty() => d,
            _ => {
                issues.push(DescentIssue::MissingCover { id: id.clone() });
                degrees_ok.insert(id, false);
                continue;
            }
        };
        let unit = piece_degree_unit(config, id).expect("component exists");
        let mut ok = true;
        let mut total: u64 = 0;
        for (k, &degree) in degrees.iter().enumerate() {
            if degree == 0 {
                issues.push(DescentIssue::ZeroPieceDegree {
                    id: id.clone(),
                    piece: k,
                });
                ok = false;
                continue;
            }
            if degree % unit != 0 {
                issues.push(DescentIssue::PieceDegreeNotMultiple {
                    id: id.clone(),
                    piece: k,
                    degree,
                    unit,
                });
                ok = false;
            }
            total = total.saturating_add(degree);
            match piece_genus(config, id, degree) {
                Ok(_) => {}
                Err(BaseChangeError::NonIntegralGenus { detail, .. }) => {
                    issues.push(DescentIssue::ImpossiblePieceGenus {
                        id: id.clone(),
                        piece: k,
                        degree,
                        reason: detail,
                    });
                    ok = false;
                }
                Err(BaseChangeError::NegativeGenus { doubled, .. }) => {
                    issues.push(DescentIssue::ImpossiblePieceGenus {
                        id: id.clone(),
                        piece: k,
                        degree,
                        reason: format!("Riemann-Hurwitz gives 2g-2 = {doubled} < -2"),
                    });
                    ok = false;
                }
                Err(_) => unreachable!("component exists and degree is positive"),
            }
        }
        if total != comp.multiplicity {
            issues.push(DescentIssue::DegreeSumMismatch {
                id: id.clone(),
                total,
                multiplicity: comp.multiplicity,
            });
            ok = false;
        }
        degrees_ok.insert(id, ok);
    }

    if n > 0 && n.is_multiple_of(lcm) {
        for (idx, e) in config.edges().iter().enumerate() {
            let (aid, bid) = e.endpoints();
            if degrees_ok.get(aid) != Some(&true) || degrees_ok.get(bid) != Some(&true) {
                continue;
            }
            let na = config.component(aid).expect("endpoint").multiplicity;
            let nb = config.component(bid).expect("endpoint").multiplicity;
            let local = node_base_change(na, nb, n).expect("lcm divides N");
            let d = local.branch_count;
            let matching = match descent.matching(idx) {
                Some(m) => m,
                None => continue, // index-order default is balanced by construction
            };
            if matching.len() as u64 != d {
                issues.push(DescentIssue::MatchingBranchCount {
                    edge: idx,
                    expected: d,
                    found: matching.len(),
                });
                continue;
            }
            let deg_a = descent.piece_degrees(aid).expect("checked");
            let deg_b = descent.piece_degrees(bid).expect("checked");
            let mut used_a = vec![0u64; deg_a.len()];
            let mut used_b = vec![0u64; deg_b.len()];
            let mut in_range = true;
            for (branch, &(pa, pb)) in matching.iter().enumerate() {
                if pa >= deg_a.len() {
                    issues.push(DescentIssue::MatchingPieceOutOfRange {
                        edge: idx,
                        branch,
                        side: "left",
                        piece: pa,
                    });
                    in_range = false;
                    continue;
                }
                if pb >= deg_b.len() {
                    issues.push(DescentIssue::MatchingPieceOutOfRange {
                        edge: idx,
                        branch,
                        side: "right",
                        piece: pb,
                    });
                    in_range = false;
                    continue;
                }
                used_a[pa] += 1;
                used_b[pb] += 1;
            }
            if !in_range {
                continue;
            }
            for (side_id, degs, used) in [(aid, deg_a, &used_a), (bid, deg_b, &used_b)] {
                let n_self = config.component(side_id).expect("endpoint").multiplicity;
                let n_other = if side_id == aid { nb } else { na };
                for (k, &degree) in degs.iter().enumerate() {
                    let slots = slots_per_end(degree, n_self, n_other).unwrap_or(0);
                    if used[k] != slots {
                        issues.push(DescentIssue::MatchingSlotsUnbalanced {
                            edge: idx,
                            id: side_id.clone(),
                            piece: k,
                            used: used[k],
                            slots,
                        });
                    }
                }
            }
        }
    }

    if issues.is_empty() {
        let (components, edges, _) = assemble(config, descent).expect("validated datum");
        let glued = FiberConfiguration::new(FiberKind::Reduced, None, components, edges)
            .expect("assembly produces well-formed graphs");
        if !glued.is_connected() {
            issues.push(DescentIssue::Disconnected);
        }
    }

    DescentReport { issues }
}

/// Picks a fresh id, extending the candidate until it is unused.
fn fresh_id(used: &mut BTreeSet<ComponentId>, candidate: String) -> ComponentId {
    let mut name = candidate;
    loop {
        let id = ComponentId::new(name.clone()).expect("generated ids stay in the charset");
        if used.insert(id.clone()) {
            return id;
        }
        name.push_str(".x");
    }
}

type Assembly = (
    BTreeMap<ComponentId, Component>,
    Vec<(ComponentId, ComponentId)>,
    MoveTrace,
);

/// Builds the reduced graph a descent datum describes. Assumes the
/// structural checks of [`validate_descent`] hold.
fn assemble(
    config: &FiberConfiguration,
    descent: &DescentData,
) -> Result<Assembly, BaseChangeError> {
    let n = descent.base_exponent;
    let mut used: BTreeSet<ComponentId> = config.component_ids().cloned().collect();
    let mut components = BTreeMap::new();
    let mut trace = MoveTrace::default();
    // component id -> (piece id, degree, genus) in declaration order
    let mut pieces_of: BTreeMap<ComponentId, Vec<(ComponentId, u64, u64)>> = BTreeMap::new();

    for (id, comp) in config.components() {
        let degrees = descent
            .piece_degrees(id)
            .ok_or_else(|| BaseChangeError::UnknownComponent(id.clone()))?;
        let identity = comp.multiplicity == 1 && degrees == [1];
        let mut pieces = Vec::with_capacity(degrees.len());
        if identity {
            pieces.push((id.clone(), 1, comp.genus));
        } else {
            for (k, &degree) in degrees.iter().enumerate() {
                let genus = piece_genus(config, id, degree)?;
                let pid = fresh_id(&mut used, format!("{id}.sheet{}", k + 1));
                pieces.push((pid, degree, genus));
            }
            trace.push(Move::BaseChangeSplit {
                parent: id.clone(),
                pieces: pieces
                    .iter()
                    .map(|(pid, degree, genus)| PieceRecord {
                        id: pid.clone(),
                        degree: *degree,
                        genus: *genus,
                    })
                    .collect(),
            });
        }
        for (pid, _, genus) in &pieces {
            components.insert(
                pid.clone(),
                Component {
                    genus: *genus,
                    multiplicity: 1,
                },
            );
        }
        pieces_of.insert(id.clone(), pieces);
    }

    let mut edges = Vec::new();
    let mut chain_counter = 0usize;
    for (idx, e) in config.edges().iter().enumerate() {
        let (aid, bid) = e.endpoints();
        let na = config.component(aid).expect("endpoint").multiplicity;
        let nb = config.component(bid).expect("endpoint").multiplicity;
        let local = node_base_change(na, nb, n).map_err(|err| {
            BaseChangeError::Model(ModelError::InternalInconsistency(format!(
                "local model rejected validated data: {err}"
            )))
        })?;
        let matching = match descent.matching(idx) {
            Some(m) => m.to_vec(),
            None => default_matching(descent, config, aid, bid, local.branch_count),
        };
        for (branch, (pa, pb)) in matching.into_iter().enumerate() {
            let left = pieces_of[aid][pa].0.clone();
            let right = pieces_of[bid][pb].0.clone();
            chain_counter += 1;
            let inserted: Vec<ComponentId> = (1..local.chain_exponent)
                .map(|p| fresh_id(&mut used, format!("{aid}-{bid}.chain{chain_counter}.{p}")))
                .collect();
            for cid in &inserted {
                components.insert(
                    cid.clone(),
                    Component {
                        genus: 0,
                        multiplicity: 1,
                    },
                );
            }
            let mut stops = Vec::with_capacity(inserted.len() + 2);
            stops.push(left.clone());
            stops.extend(inserted.iter().cloned());
            stops.push(right.clone());
            for pair in stops.windows(2) {
                edges.push((pair[0].clone(), pair[1].clone()));
            }
            let untouched = local.branch_count == 1
                && local.chain_exponent == 1
                && &left == aid
                && &right == bid;
            if !untouched {
                trace.push(Move::ChainInsert {
                    edge: (aid.clone(), bid.clone()),
                    branch,
                    left,
                    right,
                    inserted,
                });
            }
        }
    }
    Ok((components, edges, trace))
}

/// Index-order matching: the branch points of each side are listed piece
/// by piece and branch k takes the k-th point on both sides.
fn default_matching(
    descent: &DescentData,
    config: &FiberConfiguration,
    aid: &ComponentId,
    bid: &ComponentId,
    branches: u64,
) -> Vec<(usize, usize)> {
    let side = |id: &ComponentId, other: &ComponentId| -> Vec<usize> {
        let n_self = config.component(id).expect("endpoint").multiplicity;
        let n_other = config.component(other).expect("endpoint").multiplicity;
        let mut slots = Vec::new();
        for (k, &degree) in descent
            .piece_degrees(id)
            .expect("cover exists")
            .iter()
            .enumerate()
        {
            let count = slots_per_end(degree, n_self, n_other).unwrap_or(0);
            for _ in 0..count {
                slots.push(k);
            }
        }
        slots
    };
    let slots_a = side(aid, bid);
    let slots_b = side(bid, aid);
    (0..branches as usize)
        .map(|b| (slots_a[b], slots_b[b]))
        .collect()
}

/// Applies the base change described by `descent` to a valid
/// configuration, producing the reduced fiber and the move trace.
///
/// The configuration may be normal-crossings (the main case) or already
/// reduced with loops allowed; in the latter case every multiplicity is
/// 1 and a loop behaves as a node of equal branch multiplicities.
/// Arithmetic genus conservation is enforced on the result.
pub fn apply_base_change(
    config: &FiberConfiguration,
    descent: &DescentData,
) -> Result<(FiberConfiguration, MoveTrace), BaseChangeError> {
    ModelError::require_valid(config)?;
    let report = validate_descent(config, descent);
    if !report.is_valid() {
        return Err(BaseChangeError::InvalidDescent(report));
    }
    let input_genus = arithmetic_genus(config)?;
    let (components, edges, trace) = assemble(config, descent)?;
    let mut out = FiberConfiguration::new(FiberKind::Reduced, None, components, edges)?;
    let out_report = out.validate();
    if !out_report.is_valid() {
        return Err(BaseChangeError::Model(ModelError::InternalInconsistency(
            format!("base change produced an invalid fiber: {out_report}"),
        )));
    }
    let output_genus = arithmetic_genus(&out)?;
    if output_genus != input_genus {
        return Err(BaseChangeError::GenusNotConserved {
            input: input_genus,
            output: output_genus,
        });
    }
    out.set_declared_genus(Some(output_genus));
    Ok((out, trace))
}

/// Non-increasing partitions of `n`, largest-first order.
fn partitions_desc(n: u64) -> Vec<Vec<u64>> {
    fn rec(n: u64, max: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        let mut part = max.min(n);
        while part >= 1 {
            prefix.push(part);
            rec(n - part, part, prefix, out);
            prefix.pop();
            part -= 1;
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Distinct pairings of the two slot lists of one edge, as sorted branch
/// vectors, in lexicographic order.
fn distinct_pairings(slots_a: &[usize], slots_b: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let mut arrangements: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    let mut pool = slots_b.to_vec();
    pool.sort_unstable();
    let mut current = Vec::with_capacity(pool.len());
    fn rec(
        slots_a: &[usize],
        pool: &mut Vec<usize>,
        used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<(usize, usize)>>,
    ) {
        if current.len() == slots_a.len() {
            let mut pairing: Vec<(usize, usize)> = slots_a
                .iter()
                .copied()
                .zip(current.iter().copied())
                .collect();
            pairing.sort_unstable();
            out.insert(pairing);
            return;
        }
        let mut last: Option<usize> = None;
        for i in 0..pool.len() {
            if used[i] || last == Some(pool[i]) {
                continue;
            }
            last = Some(pool[i]);
            used[i] = true;
            current.push(pool[i]);
            rec(slots_a, pool, used, current, out);
            current.pop();
            used[i] = false;
        }
    }
    let mut used = vec![false; pool.len()];
    rec(
        slots_a,
        &mut pool,
        &mut used,
        &mut current,
        &mut arrangements,
    );
    arrangements.into_iter().collect()
}

/// Number of distinct arrangements of a multiset, for bounding the
/// matching enumeration before running it. Saturates at `u128::MAX`,
/// which is far beyond every bound anyway.
fn multiset_permutation_count(slots: &[usize]) -> u128 {
    fn binomial(n: u128, k: u128) -> Option<u128> {
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        for i in 1..=k {
            acc = acc.checked_mul(n - k + i)?;
            acc /= i;
        }
        Some(acc)
    }
    let mut counts: BTreeMap<usize, u128> = BTreeMap::new();
    for &s in slots {
        *counts.entry(s).or_insert(0) += 1;
    }
    let mut remaining = slots.len() as u128;
    let mut total: u128 = 1;
    for &c in counts.values() {
        let Some(ways) = binomial(remaining, c).and_then(|b| total.checked_mul(b)) else {
            return u128::MAX;
        };
        total = ways;
        remaining -= c;
    }
    total
}

/// Isomorphism key of a base-change output: rational chains are
/// suppressed into edge colors (interior length), then the remaining
/// anchor graph is canonicalized with the colors attached. Two outputs
/// get the same key exactly when they are isomorphic.
fn output_dedup_key(config: &FiberConfiguration) -> Result<String, BaseChangeError> {
    let ids: Vec<ComponentId> = config.component_ids().cloned().collect();
    let index = |id: &ComponentId| ids.binary_search(id).expect("own id");
    let n = ids.len();
    let mut labels: Vec<(u64, u64)> = Vec::with_capacity(n);
    for (_, comp) in config.components() {
        labels.push((comp.genus, comp.multiplicity));
    }
    // (endpoint, endpoint, interior length); loops have equal endpoints
    let mut edges: Vec<(usize, usize, u32)> = config
        .edges()
        .iter()
        .map(|e| {
            let (x, y) = e.endpoints();
            let (i, j) = (index(x), index(y));
            (i.min(j), i.max(j), 0u32)
        })
        .collect();
    let mut alive = vec![true; n];

    loop {
        let mut target = None;
        'scan: for v in 0..n {
            if !alive[v] || labels[v] != (0, 1) {
                continue;
            }
            let mut ends = Vec::new();
            for (k, &(i, j, _)) in edges.iter().enumerate() {
                if i == v && j == v {
                    continue 'scan; // loops anchor the vertex
                }
                if i == v || j == v {
                    ends.push(k);
                    if ends.len() > 2 {
                        continue 'scan;
                    }
                }
            }
            if ends.len() == 2 {
                target = Some((v, ends[0], ends[1]));
                break;
            }
        }
        let Some((v, k1, k2)) = target else { break };
        let (i1, j1, c1) = edges[k1];
        let (i2, j2, c2) = edges[k2];
        let x = if i1 == v { j1 } else { i1 };
        let y = if i2 == v { j2 } else { i2 };
        let merged = (x.min(y), x.max(y), c1 + c2 + 1);
        let (hi, lo) = (k1.max(k2), k1.min(k2));
        edges.remove(hi);
        edges.remove(lo);
        edges.push(merged);
        alive[v] = false;
    }

    let anchors: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    if anchors.len() > MAX_DEDUP_ANCHORS {
        return Err(BaseChangeError::BoundExceeded {
            bound: "dedup",
            detail: format!(
                "output keeps {} anchor components, deduplication is bounded at {MAX_DEDUP_ANCHORS}",
                anchors.len()
            ),
        });
    }
    let pos: BTreeMap<usize, usize> = anchors.iter().enumerate().map(|(p, &v)| (v, p)).collect();
    let m = anchors.len();
    let mut loop_colors = vec![Vec::new(); m];
    let mut adj_colors = vec![vec![Vec::new(); m]; m];
    for (i, j, c) in edges {
        let (pi, pj) = (pos[&i], pos[&j]);
        if pi == pj {
            loop_colors[pi].push(c);
        } else {
            adj_colors[pi][pj].push(c);
            adj_colors[pj][pi].push(c);
        }
    }
    for colors in &mut loop_colors {
        colors.sort_unstable();
    }
    for row in &mut adj_colors {
        for colors in row {
            colors.sort_unstable();
        }
    }
    let anchor_labels = anchors.iter().map(|&v| labels[v]).collect();
    Ok(colored_canonical_key(
        anchor_labels,
        loop_colors,
        adj_colors,
    ))
}

/// Exhaustive bounded search for consistent descent data.
///
/// Candidates run over piece-degree partitions (multiples of the
/// per-component unit, largest pieces first) and over branch matchings
/// per edge; a candidate is kept when it validates and conserves the
/// arithmetic genus. Results are deduplicated by isomorphism of the
/// output graph and returned in deterministic search order, at most
/// `max_results` of them.
pub fn search_descent(
    config: &FiberConfiguration,
    base_exponent: u64,
    max_results: usize,
) -> Result<Vec<DescentData>, BaseChangeError> {
    ModelError::require_valid(config)?;
    if max_results == 0 {
        return Err(BaseChangeError::BoundExceeded {
            bound: "max-results",
            detail: "must be positive".to_string(),
        });
    }
    let count = config.component_count();
    if count > MAX_SEARCH_COMPONENTS {
        return Err(BaseChangeError::BoundExceeded {
            bound: "components",
            detail: format!("{count} components, search is bounded at {MAX_SEARCH_COMPONENTS}"),
        });
    }
    let lcm = multiplicity_lcm(config);
    if base_exponent == 0 || !base_exponent.is_multiple_of(lcm) {
        return Err(BaseChangeError::NotDivisible { lcm, base_exponent });
    }

    let ids: Vec<ComponentId> = config.component_ids().cloned().collect();
    let mut partition_choices: Vec<Vec<Vec<u64>>> = Vec::with_capacity(ids.len());
    for id in &ids {
        let comp = config.component(id).expect("own id");
        let unit = piece_degree_unit(config, id)?;
        let scaled = partitions_desc(comp.multiplicity / unit);
        if scaled.len() > MAX_PARTITIONS_PER_COMPONENT {
            return Err(BaseChangeError::BoundExceeded {
                bound: "piece partitions",
                detail: format!(
                    "component {id} admits {} partitions, bounded at {MAX_PARTITIONS_PER_COMPONENT}",
                    scaled.len()
                ),
            });
        }
        partition_choices.push(
            scaled
                .into_iter()
                .map(|p| p.into_iter().map(|x| x * unit).collect())
                .collect(),
        );
    }

    let mut results = Vec::new();
    let mut seen = BTreeSet::new();
    let mut candidates_tried: u64 = 0;
    let mut partition_index = vec![0usize; ids.len()];
    'combos: loop {
        let pieces: BTreeMap<ComponentId, Vec<u64>> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), partition_choices[i][partition_index[i]].clone()))
            .collect();

        // Enumerate matchings per edge for this partition combination.
        let mut per_edge: Vec<Vec<Vec<(usize, usize)>>> = Vec::with_capacity(config.edge_count());
        let mut matching_total: u128 = 1;
        let mut feasible = true;
        for e in config.edges() {
            let (aid, bid) = e.endpoints();
            let na = config.component(aid).expect("endpoint").multiplicity;
            let nb = config.component(bid).expect("endpoint").multiplicity;
            let slots = |id: &ComponentId, n_self: u64, n_other: u64| -> Vec<usize> {
                pieces[id]
                    .iter()
                    .enumerate()
                    .flat_map(|(k, &degree)| {
                        let count = slots_per_end(degree, n_self, n_other).unwrap_or(0);
                        std::iter::repeat_n(k, count as usize)
                    })
                    .collect()
            };
            let slots_a = slots(aid, na, nb);
            let slots_b = slots(bid, nb, na);
            if slots_a.len() != slots_b.len() {
                feasible = false;
                break;
            }
            matching_total = matching_total.saturating_mul(multiset_permutation_count(&slots_b));
            if matching_total > MAX_MATCHINGS {
                return Err(BaseChangeError::BoundExceeded {
                    bound: "matchings",
                    detail: format!(
                        "edge set admits more than {MAX_MATCHINGS} matching combinations"
                    ),
                });
            }
            per_edge.push(distinct_pairings(&slots_a, &slots_b));
        }

        if feasible && per_edge.iter().all(|m| !m.is_empty()) {
            let mut matching_index = vec![0usize; per_edge.len()];
            'matchings: loop {
                candidates_tried += 1;
                if candidates_tried > MAX_SEARCH_CANDIDATES {
                    return Err(BaseChangeError::BoundExceeded {
                        bound: "candidates",
                        detail: format!(
                            "search evaluated more than {MAX_SEARCH_CANDIDATES} candidates"
                        ),
                    });
                }
                let matchings: BTreeMap<usize, Vec<(usize, usize)>> = matching_index
                    .iter()
                    .enumerate()
                    .map(|(edge, &k)| (edge, per_edge[edge][k].clone()))
                    .collect();
                let candidate = DescentData::new(base_exponent, pieces.clone(), matchings);
                match apply_base_change(config, &candidate) {
                    Ok((output, _)) => {
                        let key = output_dedup_key(&output)?;
                        if seen.insert(key) {
                            results.push(candidate);
                            if results.len() == max_results {
                                return Ok(results);
                            }
                        }
                    }
                    Err(BaseChangeError::InvalidDescent(_))
                    | Err(BaseChangeError::GenusNotConserved { .. }) => {}
                    Err(other) => return Err(other),
                }
                // odometer over matchings
                let mut pos = per_edge.len();
                while pos > 0 {
                    pos -= 1;
                    matching_index[pos] += 1;
                    if matching_index[pos] < per_edge[pos].len() {
                        continue 'matchings;
                    }
                    matching_index[pos] = 0;
                }
                break;
            }
        }

        // odometer over partitions
        let mut pos = ids.len();
        while pos > 0 {
            pos -= 1;
            partition_index[pos] += 1;
            if partition_index[pos] < partition_choices[pos].len() {
                continue 'combos;
            }
            partition_index[pos] = 0;
        }
        break;
    }

    if results.is_empty() {
        Err(BaseChangeError::NoConsistentDescent)
    } else {
        Ok(results)
    }
}
