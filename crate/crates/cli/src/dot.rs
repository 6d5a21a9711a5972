//! Graphviz output: one node per component labeled with its genus,
//! multiplicity, and self-intersection, one undirected edge per node of
//! the fiber. Output is deterministic (components and edges sorted).

use stabred_core::{component_invariants, FiberConfiguration, ModelError};

pub fn emit_dot(config: &FiberConfiguration) -> Result<String, ModelError> {
    let invariants = component_invariants(config)?;
    let mut out = String::from("graph fiber {\n");
    for (id, comp) in config.components() {
        out.push_str(&format!(
            "  \"{id}\" [label=\"{id}\\ng={} n={} E2={}\"];\n",
            comp.genus, comp.multiplicity, invariants[id].self_intersection
        ));
    }
    for e in config.edges() {
        let (a, b) = e.endpoints();
        out.push_str(&format!("  \"{a}\" -- \"{b}\";\n"));
    }
    out.push_str("}\n");
    Ok(out)
}
