//! Audit trace of a reduction: every structural rewrite of the dual
//! graph is recorded as a move, and a trace can be replayed against the
//! input to reproduce the output bit for bit.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{Component, ComponentId, Edge, FiberConfiguration, FiberKind, ModelError};

/// One cover piece created over a component by base change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PieceRecord {
    pub id: ComponentId,
    pub degree: u64,
    pub genus: u64,
}

/// A single rewrite of the dual graph.
///
/// Contractions double as the exceptional-curve classification: a
/// valence-1 move removes a (-1)-curve, a valence-2 move removes a
/// (-2)-curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    /// A component was replaced by the pieces of its preimage cover.
    /// Recorded only when something changed (new ids, new genus, or more
    /// than one piece).
    BaseChangeSplit {
        parent: ComponentId,
        pieces: Vec<PieceRecord>,
    },
    /// One branch over a node was rebuilt, possibly inserting a chain of
    /// rational curves between the two endpoint pieces. Recorded only
    /// when the branch differs from the original node.
    ChainInsert {
        /// Endpoints of the original node, in sorted order.
        edge: (ComponentId, ComponentId),
        branch: usize,
        left: ComponentId,
        right: ComponentId,
        inserted: Vec<ComponentId>,
    },
    /// Contraction of a valence-1 rational component, a (-1)-curve.
    ContractValence1 {
        id: ComponentId,
        neighbor: ComponentId,
    },
    /// Contraction of a valence-2 rational component, a (-2)-curve; the
    /// two neighbors get joined directly (a loop when they coincide).
    ContractValence2 {
        id: ComponentId,
        left: ComponentId,
        right: ComponentId,
    },
}

/// Ordered list of moves.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MoveTrace {
    moves: Vec<Move>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("replay refers to missing component {0}")]
    MissingComponent(ComponentId),
    #[error("replay refers to missing node {0}--{1}")]
    MissingEdge(ComponentId, ComponentId),
    #[error("replay created an inconsistent configuration: {0}")]
    Model(#[from] ModelError),
}

impl MoveTrace {
    pub fn new(moves: Vec<Move>) -> Self {
        MoveTrace { moves }
    }

    pub fn push(&mut self, mv: Move) {
        self.moves.push(mv);
    }

    pub fn extend(&mut self, other: MoveTrace) {
        self.moves.extend(other.moves);
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Applies the trace to `start`, producing the graph the recorded
    /// pipeline produced. `final_kind` tags the result; the graph part is
    /// determined by the moves alone.
    pub fn replay(
        &self,
        start: &FiberConfiguration,
        final_kind: FiberKind,
    ) -> Result<FiberConfiguration, ReplayError> {
        let mut components: BTreeMap<ComponentId, Component> = start
            .components()
            .map(|(id, comp)| (id.clone(), *comp))
            .collect();
        let mut edges: Vec<Edge> = start.edges().to_vec();

        let remove_edge = |edges: &mut Vec<Edge>, x: &ComponentId, y: &ComponentId| {
            let target = Edge::new(x.clone(), y.clone());
            match edges.iter().position(|e| *e == target) {
                Some(pos) => {
                    edges.remove(pos);
                    Ok(())
                }
                None => Err(ReplayError::MissingEdge(x.clone(), y.clone())),
            }
        };

        for mv in &self.moves {
            match mv {
                Move::BaseChangeSplit { parent, pieces } => {
                    let old = components
                        .remove(parent)
                        .ok_or_else(|| ReplayError::MissingComponent(parent.clone()))?;
                    let _ = old;
                    for piece in pieces {
                        components.insert(
                            piece.id.clone(),
                            Component {
                                genus: piece.genus,
                                multiplicity: 1,
                            },
                        );
                    }
                }
                Move::ChainInsert {
                    edge,
                    branch,
                    left,
                    right,
                    inserted,
                } => {
                    // The original node is consumed once, by its first branch.
                    if *branch == 0 {
                        remove_edge(&mut edges, &edge.0, &edge.1)?;
                    }
                    for id in inserted {
                        components.insert(
                            id.clone(),
                            Component {
                                genus: 0,
                                multiplicity: 1,
                            },
                        );
                    }
                    let mut stops: Vec<&ComponentId> = Vec::with_capacity(inserted.len() + 2);
                    stops.push(left);
                    stops.extend(inserted.iter());
                    stops.push(right);
                    for pair in stops.windows(2) {
                        edges.push(Edge::new(pair[0].clone(), pair[1].clone()));
                    }
                }
                Move::ContractValence1 { id, neighbor } => {
                    components
                        .remove(id)
                        .ok_or_else(|| ReplayError::MissingComponent(id.clone()))?;
                    remove_edge(&mut edges, id, neighbor)?;
                }
                Move::ContractValence2 { id, left, right } => {
                    components
                        .remove(id)
                        .ok_or_else(|| ReplayError::MissingComponent(id.clone()))?;
                    remove_edge(&mut edges, id, left)?;
                    remove_edge(&mut edges, id, right)?;
                    edges.push(Edge::new(left.clone(), right.clone()));
                }
            }
        }

        let edge_pairs: Vec<(ComponentId, ComponentId)> = edges
            .into_iter()
            .map(|e| {
                let (x, y) = e.endpoints();
                (x.clone(), y.clone())
            })
            .collect();
        Ok(FiberConfiguration::new(
            final_kind, None, components, edge_pairs,
        )?)
    }
}

impl IntoIterator for MoveTrace {
    type Item = Move;
    type IntoIter = std::vec::IntoIter<Move>;

    fn into_iter(self) -> Self::IntoIter {
        self.moves.into_iter()
    }
}
