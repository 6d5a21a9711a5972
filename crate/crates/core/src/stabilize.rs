//! Contraction of unstable rational components on a reduced fiber.
//!
//! On a reduced fiber a genus-0 loop-free component E meets the rest of
//! the fiber in -E^2 points, so the components violating stability fall
//! into E^2 = -1 (valence 1), E^2 = -2 (valence 2), or E^2 = 0. The last
//! case would make E isolated in its fiber, which the Zariski main
//! theorem forbids; the first two contract, one vertex at a time, until
//! the stability condition holds. Every move conserves the arithmetic
//! genus and is recorded for replay.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::invariants::{arithmetic_genus, stability_report};
use crate::model::{ComponentId, FiberConfiguration, FiberKind, ModelError};
use crate::trace::{Move, MoveTrace};

/// Contraction status of a component in a reduced fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentClass {
    /// Not subject to contraction: positive genus, loops, or valence >= 3.
    Stable,
    /// Genus 0, valence 1: a (-1)-curve, removed with its node.
    BlowDown,
    /// Genus 0, valence 2: a (-2)-curve inside a chain.
    ChainMember,
    /// Genus 0, valence 0: an isolated rational component, impossible in
    /// an actual fiber.
    ZariskiImpossible,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilizeError {
    #[error("component {id} is not contractible (classified {class:?})")]
    NotContractible {
        id: ComponentId,
        class: ComponentClass,
    },
    #[error("Zariski main theorem violation: rational component {id} would be isolated in its fiber (E^2 = 0)")]
    ZariskiViolation { id: ComponentId },
    #[error("arithmetic genus {found} is below 2, no stable model exists")]
    GenusTooSmall { found: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Classifies every component of a reduced fiber. Loop-carrying and
/// positive-genus components are never contracted and count as stable
/// here regardless of the stability predicate.
pub fn classify_components(config: &FiberConfiguration) -> BTreeMap<ComponentId, ComponentClass> {
    config
        .components()
        .map(|(id, comp)| {
            let class = if comp.genus != 0 || config.loops_at(id) > 0 {
                ComponentClass::Stable
            } else {
                match config.valence(id) {
                    0 => ComponentClass::ZariskiImpossible,
                    1 => ComponentClass::BlowDown,
                    2 => ComponentClass::ChainMember,
                    _ => ComponentClass::Stable,
                }
            };
            (id.clone(), class)
        })
        .collect()
}

fn classify_one(config: &FiberConfiguration, id: &ComponentId) -> Option<ComponentClass> {
    let comp = config.component(id)?;
    Some(if comp.genus != 0 || config.loops_at(id) > 0 {
        ComponentClass::Stable
    } else {
        match config.valence(id) {
            0 => ComponentClass::ZariskiImpossible,
            1 => ComponentClass::BlowDown,
            2 => ComponentClass::ChainMember,
            _ => ComponentClass::Stable,
        }
    })
}

/// Contracts a single BlowDown or ChainMember component.
///
/// Valence 1 removes the vertex and its node; valence 2 removes the
/// vertex and joins its two neighbors directly, producing a loop when
/// they coincide (the chain closed up into an irreducible node).
/// Arithmetic genus is checked before and after.
pub fn contract_one(
    config: &FiberConfiguration,
    id: &ComponentId,
) -> Result<(FiberConfiguration, Move), StabilizeError> {
    let class = classify_one(config, id)
        .ok_or_else(|| StabilizeError::Model(ModelError::UnknownEndpoint(id.clone())))?;
    if !matches!(
        class,
        ComponentClass::BlowDown | ComponentClass::ChainMember
    ) {
        return Err(StabilizeError::NotContractible {
            id: id.clone(),
            class,
        });
    }
    let genus_before = arithmetic_genus(config)?;

    let components: Vec<_> = config
        .components()
        .filter(|(cid, _)| *cid != id)
        .map(|(cid, comp)| (cid.clone(), *comp))
        .collect();
    let mut touching = Vec::new();
    let mut edges: Vec<(ComponentId, ComponentId)> = Vec::new();
    for e in config.edges() {
        if e.touches(id) {
            let other = e.other(id).expect("contractible components have no loops");
            touching.push(other.clone());
        } else {
            let (x, y) = e.endpoints();
            edges.push((x.clone(), y.clone()));
        }
    }
    touching.sort();
    let mv = match class {
        ComponentClass::BlowDown => {
            debug_assert_eq!(touching.len(), 1);
            Move::ContractValence1 {
                id: id.clone(),
                neighbor: touching[0].clone(),
            }
        }
        ComponentClass::ChainMember => {
            debug_assert_eq!(touching.len(), 2);
            edges.push((touching[0].clone(), touching[1].clone()));
            Move::ContractValence2 {
                id: id.clone(),
                left: touching[0].clone(),
                right: touching[1].clone(),
            }
        }
        _ => unreachable!(),
    };
    let contracted =
        FiberConfiguration::new(config.kind(), config.declared_genus(), components, edges)
            .map_err(StabilizeError::Model)?;
    let genus_after = arithmetic_genus(&contracted)?;
    if genus_after != genus_before {
        return Err(StabilizeError::Model(ModelError::InternalInconsistency(
            format!("contraction of {id} changed p_a from {genus_before} to {genus_after}"),
        )));
    }
    Ok((contracted, mv))
}

fn zariski_offender(config: &FiberConfiguration) -> Option<ComponentId> {
    if config.component_count() < 2 {
        return None;
    }
    config
        .components()
        .find(|(id, comp)| comp.genus == 0 && config.loops_at(id) == 0 && config.valence(id) == 0)
        .map(|(id, _)| id.clone())
}

/// Contracts unstable rational components, smallest id first, until the
/// stability condition holds; returns the stable candidate and the full
/// move trace. Requires a valid reduced fiber of arithmetic genus >= 2.
pub fn stabilize(
    config: &FiberConfiguration,
) -> Result<(FiberConfiguration, MoveTrace), StabilizeError> {
    if config.kind() == FiberKind::NormalCrossings {
        return Err(StabilizeError::Model(ModelError::WrongKind {
            expected: "reduced or stable-candidate",
            found: config.kind(),
        }));
    }
    // An isolated rational component is diagnosed before general
    // validation so the geometric impossibility is named.
    if let Some(id) = zariski_offender(config) {
        return Err(StabilizeError::ZariskiViolation { id });
    }
    ModelError::require_valid(config)?;
    let genus = arithmetic_genus(config)?;
    if genus < 2 {
        return Err(StabilizeError::GenusTooSmall { found: genus });
    }

    let mut current = config.clone();
    let mut trace = MoveTrace::default();
    loop {
        let classes = classify_components(&current);
        if let Some((id, _)) = classes
            .iter()
            .find(|(_, c)| **c == ComponentClass::ZariskiImpossible)
        {
            return Err(StabilizeError::ZariskiViolation { id: id.clone() });
        }
        let target = classes
            .iter()
            .find(|(_, c)| matches!(c, ComponentClass::BlowDown | ComponentClass::ChainMember));
        let Some((id, _)) = target else { break };
        let (next, mv) = contract_one(&current, &id.clone())?;
        current = next;
        trace.push(mv);
    }
    current.set_kind(FiberKind::StableCandidate);
    current.set_declared_genus(Some(genus));
    let report = stability_report(&current).map_err(StabilizeError::Model)?;
    if !report.stable {
        return Err(StabilizeError::Model(ModelError::InternalInconsistency(
            "no contractible component left but the fiber is not stable".to_string(),
        )));
    }
    Ok((current, trace))
}
