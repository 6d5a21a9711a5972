//! Exact combinatorial engine for stable reduction of one-parameter
//! families of curves in characteristic zero.
//!
//! The engine works on numerical models: a degenerating family is
//! represented by the weighted dual graph of its central fiber
//! ([`FiberConfiguration`]), and the three reduction steps become graph
//! rewrites. Base change kills multiplicities by replacing components
//! with cover pieces and nodes with chains of rational curves
//! ([`basechange`]); contraction removes the rational components that
//! violate stability ([`stabilize`]); the result is certified against
//! the stable-curve condition ([`invariants`]). Arithmetic genus is
//! conserved at every step, by construction and by runtime check.
//!
//! All arithmetic is exact: machine integers for graph data, arbitrary
//! precision for the closed-form genus quantities in [`numerology`].

pub mod basechange;
pub mod canon;
pub mod enumerate;
pub mod invariants;
pub mod local;
pub mod model;
pub mod numerology;
pub mod stabilize;
pub mod trace;

pub use basechange::{
    apply_base_change, cover_pieces, piece_degree_unit, piece_genus, search_descent,
    validate_descent, BaseChangeError, CoverPiece, DescentData, DescentIssue, DescentReport,
};
pub use canon::{canonical_form, CanonError, MAX_CANONICAL_COMPONENTS};
pub use enumerate::{
    enumerate_stable_configs, enumerate_stable_graphs, EnumerateError, MAX_ENUMERATION_GENUS,
    MAX_ENUMERATION_VERTICES,
};
pub use invariants::{
    arithmetic_genus, component_invariants, stability_report, ComponentInvariants,
    ComponentStability, StabilityReport,
};
pub use local::{
    node_base_change, normalization_witness, split_smooth_point, LocalError, NodeBaseChangeResult,
    NormalizationWitness, RootOfUnity, SheetSplitting,
};
pub use model::{
    Component, ComponentId, Edge, FiberConfiguration, FiberKind, ModelError, ValidationIssue,
    ValidationReport,
};
pub use numerology::{genus_formulas, hilbert_polynomial, NumerologyError, NumerologyRecord};
pub use stabilize::{classify_components, contract_one, stabilize, ComponentClass, StabilizeError};
pub use trace::{Move, MoveTrace, PieceRecord, ReplayError};
