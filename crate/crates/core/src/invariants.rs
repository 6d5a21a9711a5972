//! Intersection numbers, arithmetic genus, and the stability predicate.
//!
//! Everything here is forced by two facts: the fiber divisor has zero
//! intersection with each of its components, and adjunction ties the
//! canonical pairing to the arithmetic genus of a component. For a
//! component E of multiplicity n inside the fiber F = sum n_i E_i:
//!
//! ```text
//! n * E^2 = -(sum of the multiplicities across non-loop edges at E)
//! K.E     = 2 * (genus(E) + loops(E)) - 2 - E^2
//! p_a(F)  = 1 + (sum over components of n_i * K.E_i) / 2
//! ```
//!
//! Loops are self-nodes: they do not enter E^2, but each one raises the
//! arithmetic genus of its component by one, which is where the
//! `+ loops(E)` in the adjunction line comes from.

use std::collections::BTreeMap;

use crate::model::{ComponentId, FiberConfiguration, FiberKind, ModelError};

/// Derived intersection data of a single component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentInvariants {
    /// E^2 on the ambient surface.
    pub self_intersection: i64,
    /// K.E, the canonical pairing.
    pub canonical_pairing: i64,
    /// Degree of the dualizing sheaf on the component:
    /// 2*genus - 2 + valence, loops counted twice.
    pub dualizing_degree: i64,
    /// Number of edge ends at the component (loops count twice).
    pub valence: usize,
}

/// Computes [`ComponentInvariants`] for every component.
///
/// Fails with [`ModelError::NonIntegralSelfIntersection`] when the fiber
/// relation does not divide out, i.e. the input is not the dual graph of
/// an actual fiber.
pub fn component_invariants(
    config: &FiberConfiguration,
) -> Result<BTreeMap<ComponentId, ComponentInvariants>, ModelError> {
    let mut out = BTreeMap::new();
    for (id, comp) in config.components() {
        let n = i128::from(comp.multiplicity);
        let neighbor_sum = config.neighbor_multiplicity_sum(id);
        if neighbor_sum % n != 0 {
            return Err(ModelError::NonIntegralSelfIntersection {
                id: id.clone(),
                multiplicity: comp.multiplicity,
                neighbor_sum,
            });
        }
        let e2 = -(neighbor_sum / n);
        let loops = config.loops_at(id) as i128;
        let k_e = 2 * (i128::from(comp.genus) + loops) - 2 - e2;
        let valence = config.valence(id);
        let dualizing = 2 * i128::from(comp.genus) - 2 + valence as i128;
        out.insert(
            id.clone(),
            ComponentInvariants {
                self_intersection: narrow(e2)?,
                canonical_pairing: narrow(k_e)?,
                dualizing_degree: narrow(dualizing)?,
                valence,
            },
        );
    }
    Ok(out)
}

fn narrow(value: i128) -> Result<i64, ModelError> {
    i64::try_from(value).map_err(|_| {
        ModelError::InternalInconsistency(format!("intersection number {value} overflows"))
    })
}

/// Arithmetic genus of the fiber.
///
/// Computed through adjunction on the intersection form. On reduced
/// fibers the combinatorial count (sum of component genera plus the first
/// Betti number of the dual graph) is evaluated as well and the two
/// routes must agree; a mismatch means the model itself is broken and
/// aborts the computation.
pub fn arithmetic_genus(config: &FiberConfiguration) -> Result<u64, ModelError> {
    if !config.is_connected() {
        return Err(ModelError::InvalidConfiguration(config.validate()));
    }
    let invariants = component_invariants(config)?;
    let overflow =
        || ModelError::InternalInconsistency("total canonical degree overflows".to_string());
    let mut weighted_canonical: i128 = 0;
    for (id, comp) in config.components() {
        let k_e = i128::from(invariants[id].canonical_pairing);
        let term = i128::from(comp.multiplicity)
            .checked_mul(k_e)
            .ok_or_else(overflow)?;
        weighted_canonical = weighted_canonical.checked_add(term).ok_or_else(overflow)?;
    }
    if weighted_canonical % 2 != 0 {
        return Err(ModelError::InternalInconsistency(format!(
            "odd total canonical degree {weighted_canonical}"
        )));
    }
    let p_a = 1 + weighted_canonical / 2;
    if p_a < 0 {
        return Err(ModelError::InternalInconsistency(format!(
            "negative arithmetic genus {p_a}"
        )));
    }
    let p_a = p_a as u64;
    if config.kind().requires_reduced() {
        let genus_sum: u64 = config.components().map(|(_, c)| c.genus).sum();
        let betti = config.first_betti_number();
        let combinatorial = genus_sum as i128 + i128::from(betti);
        if combinatorial != i128::from(p_a) {
            return Err(ModelError::InternalInconsistency(format!(
                "genus routes disagree: adjunction gives {p_a}, combinatorics gives {combinatorial}"
            )));
        }
    }
    Ok(p_a)
}

/// Stability of one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentStability {
    pub dualizing_degree: i64,
    /// True iff the dualizing sheaf has positive degree here, i.e. a
    /// genus-0 component has valence >= 3 and a genus-1 component has
    /// valence >= 1.
    pub stable_compatible: bool,
}

/// Per-component stability plus the overall verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityReport {
    per_component: BTreeMap<ComponentId, ComponentStability>,
    pub arithmetic_genus: u64,
    /// Every component passes and the genus is at least 2, which is
    /// exactly ampleness of the dualizing sheaf.
    pub stable: bool,
}

impl StabilityReport {
    pub fn component(&self, id: &ComponentId) -> Option<&ComponentStability> {
        self.per_component.get(id)
    }

    pub fn components(&self) -> impl Iterator<Item = (&ComponentId, &ComponentStability)> {
        self.per_component.iter()
    }

    /// Ids of components violating the stability condition, in id order.
    pub fn offenders(&self) -> Vec<&ComponentId> {
        self.per_component
            .iter()
            .filter(|(_, s)| !s.stable_compatible)
            .map(|(id, _)| id)
            .collect()
    }
}

/// Evaluates the stability condition on a reduced or stable-candidate
/// configuration. Normal-crossings input is only accepted when all
/// multiplicities are already 1.
pub fn stability_report(config: &FiberConfiguration) -> Result<StabilityReport, ModelError> {
    if config.kind() == FiberKind::NormalCrossings
        && config.components().any(|(_, c)| c.multiplicity > 1)
    {
        return Err(ModelError::WrongKind {
            expected: "reduced or stable-candidate",
            found: config.kind(),
        });
    }
    ModelError::require_valid(config)?;
    let p_a = arithmetic_genus(config)?;
    let mut per_component = BTreeMap::new();
    let mut all_pass = true;
    for (id, comp) in config.components() {
        let valence = config.valence(id) as i64;
        let dualizing = 2 * comp.genus as i64 - 2 + valence;
        let pass = dualizing > 0;
        all_pass &= pass;
        per_component.insert(
            id.clone(),
            ComponentStability {
                dualizing_degree: dualizing,
                stable_compatible: pass,
            },
        );
    }
    Ok(StabilityReport {
        per_component,
        arithmetic_genus: p_a,
        stable: all_pass && p_a >= 2,
    })
}
