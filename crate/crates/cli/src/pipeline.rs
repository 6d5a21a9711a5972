//! Subcommand implementations and the exit-code taxonomy.
//!
//! Exit codes: 0 success; 1 parse or validation failure (including
//! unusable preconditions such as genus below 2); 2 mathematical
//! inconsistency (Zariski violation, inconsistent descent data, genus
//! non-conservation, internal cross-check failures); 3 exhausted or
//! exceeded search (no consistent descent, search and enumeration
//! bounds).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use stabred_core::{
    apply_base_change, arithmetic_genus, component_invariants, enumerate_stable_graphs,
    genus_formulas, hilbert_polynomial, node_base_change, normalization_witness, search_descent,
    split_smooth_point, stability_report, stabilize, BaseChangeError, ComponentId, DescentData,
    EnumerateError, FiberConfiguration, FiberKind, ModelError, Move, MoveTrace, NumerologyError,
    StabilityReport, StabilizeError,
};

use crate::dot::emit_dot;
use crate::format::{format_trace, kind_token, parse_descent, parse_fiber, serialize_fiber};

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<crate::format::ParseError> for CliError {
    fn from(e: crate::format::ParseError) -> Self {
        CliError::new(1, e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let code = match e {
            ModelError::InternalInconsistency(_) => 2,
            _ => 1,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<StabilizeError> for CliError {
    fn from(e: StabilizeError) -> Self {
        match e {
            StabilizeError::ZariskiViolation { .. } => CliError::new(2, e.to_string()),
            StabilizeError::Model(m) => m.into(),
            _ => CliError::new(1, e.to_string()),
        }
    }
}

impl From<BaseChangeError> for CliError {
    fn from(e: BaseChangeError) -> Self {
        match e {
            BaseChangeError::InvalidDescent(_)
            | BaseChangeError::GenusNotConserved { .. }
            | BaseChangeError::NonIntegralGenus { .. }
            | BaseChangeError::NegativeGenus { .. } => CliError::new(2, e.to_string()),
            BaseChangeError::BoundExceeded { .. } | BaseChangeError::NoConsistentDescent => {
                CliError::new(3, e.to_string())
            }
            BaseChangeError::Model(m) => m.into(),
            BaseChangeError::NotDivisible { .. } | BaseChangeError::UnknownComponent(_) => {
                CliError::new(1, e.to_string())
            }
        }
    }
}

impl From<EnumerateError> for CliError {
    fn from(e: EnumerateError) -> Self {
        match e {
            EnumerateError::GenusTooSmall(_) => CliError::new(1, e.to_string()),
            EnumerateError::BoundExceeded(_) => CliError::new(3, e.to_string()),
        }
    }
}

impl From<NumerologyError> for CliError {
    fn from(e: NumerologyError) -> Self {
        CliError::new(1, e.to_string())
    }
}

impl From<stabred_core::LocalError> for CliError {
    fn from(e: stabred_core::LocalError) -> Self {
        CliError::new(1, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::new(1, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::new(1, format!("cannot write {}: {e}", path.display())))
}

fn load_fiber(path: &Path) -> Result<FiberConfiguration, CliError> {
    Ok(parse_fiber(&read(path)?)?)
}

/// Isolated rational component in a multi-component fiber: the one
/// disconnection pattern that gets the geometric diagnosis (and exit 2)
/// instead of a plain validation failure.
fn zariski_offender(config: &FiberConfiguration) -> Option<&ComponentId> {
    if config.component_count() < 2 {
        return None;
    }
    config
        .components()
        .find(|(id, comp)| comp.genus == 0 && config.loops_at(id) == 0 && config.valence(id) == 0)
        .map(|(id, _)| id)
}

fn ensure_pipeline_input(config: &FiberConfiguration) -> Result<(), CliError> {
    let report = config.validate();
    if report.is_valid() {
        return Ok(());
    }
    if let Some(id) = zariski_offender(config) {
        return Err(CliError::new(
            2,
            format!(
                "Zariski main theorem violation: rational component {id} would be isolated in its fiber (E^2 = 0)"
            ),
        ));
    }
    Err(CliError::new(
        1,
        format!("invalid configuration:\n{report}"),
    ))
}

fn summary(config: &FiberConfiguration) -> Result<String, CliError> {
    let p_a = arithmetic_genus(config)?;
    Ok(format!(
        "kind={} components={} nodes={} p_a={p_a}",
        kind_token(config.kind()),
        config.component_count(),
        config.edge_count()
    ))
}

/// Common output options of the transforming subcommands.
#[derive(Debug, Default, Clone)]
pub struct OutputOptions {
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub dot: Option<PathBuf>,
}

impl OutputOptions {
    fn emit(&self, final_config: &FiberConfiguration, trace: &MoveTrace) -> Result<(), CliError> {
        if let Some(path) = &self.output {
            write(path, &serialize_fiber(final_config))?;
        }
        if let Some(path) = &self.trace {
            write(path, &format_trace(trace))?;
        }
        if let Some(path) = &self.dot {
            write(path, &emit_dot(final_config)?)?;
        }
        Ok(())
    }
}

pub fn cmd_validate(file: &Path) -> Result<String, CliError> {
    let config = load_fiber(file)?;
    let report = config.validate();
    if report.is_valid() {
        Ok(format!("valid: {}\n", summary(&config)?))
    } else {
        Err(CliError::new(
            1,
            format!("invalid configuration:\n{report}"),
        ))
    }
}

pub fn cmd_invariants(file: &Path) -> Result<String, CliError> {
    let config = load_fiber(file)?;
    let report = config.validate();
    if !report.is_valid() {
        return Err(CliError::new(
            1,
            format!("invalid configuration:\n{report}"),
        ));
    }
    let invariants = component_invariants(&config)?;
    let p_a = arithmetic_genus(&config)?;
    let mut out = String::new();
    for (id, inv) in &invariants {
        writeln!(
            out,
            "{id}: E2={} K.E={} deg_omega={} valence={}",
            inv.self_intersection, inv.canonical_pairing, inv.dualizing_degree, inv.valence
        )
        .unwrap();
    }
    for (idx, e) in config.edges().iter().enumerate() {
        writeln!(out, "edge {idx}: {e}").unwrap();
    }
    writeln!(out, "p_a={p_a}").unwrap();
    Ok(out)
}

/// Resolves the descent datum for a base change: an explicit file wins,
/// otherwise the consistent data are searched at the requested exponent
/// (default: the lcm of the multiplicities).
fn resolve_descent(
    config: &FiberConfiguration,
    n: Option<u64>,
    descent_file: Option<&Path>,
    max_results: usize,
) -> Result<(DescentData, String), CliError> {
    if let Some(path) = descent_file {
        let descent = parse_descent(&read(path)?, config)?;
        let note = format!(
            "descent: N={} from {}",
            descent.base_exponent(),
            path.display()
        );
        return Ok((descent, note));
    }
    let exponent = n.unwrap_or_else(|| {
        config
            .components()
            .fold(1u64, |acc, (_, c)| num_integer::lcm(acc, c.multiplicity))
    });
    let candidates = search_descent(config, exponent, max_results)?;
    let note = format!(
        "descent: N={exponent} via search ({} candidate{})",
        candidates.len(),
        if candidates.len() == 1 { "" } else { "s" }
    );
    Ok((candidates.into_iter().next().expect("nonempty"), note))
}

pub fn cmd_basechange(
    file: &Path,
    n: Option<u64>,
    descent_file: Option<&Path>,
    max_results: usize,
    outputs: &OutputOptions,
) -> Result<String, CliError> {
    let config = load_fiber(file)?;
    ensure_pipeline_input(&config)?;
    let (descent, note) = resolve_descent(&config, n, descent_file, max_results)?;
    let (reduced, trace) = apply_base_change(&config, &descent)?;
    outputs.emit(&reduced, &trace)?;
    Ok(format!(
        "input: {}\n{note}\nbase change: {} moves={}\n",
        summary(&config)?,
        summary(&reduced)?,
        trace.len()
    ))
}

pub fn cmd_stabilize(file: &Path, outputs: &OutputOptions) -> Result<String, CliError> {
    let config = load_fiber(file)?;
    if config.kind() == FiberKind::NormalCrossings {
        if let Some(id) = zariski_offender(&config) {
            return Err(CliError::new(
                2,
                format!(
                    "Zariski main theorem violation: rational component {id} would be isolated in its fiber (E^2 = 0)"
                ),
            ));
        }
        return Err(CliError::new(
            1,
            "stabilize requires a reduced fiber; run basechange first",
        ));
    }
    let (stable, trace) = stabilize(&config)?;
    outputs.emit(&stable, &trace)?;
    let report = stability_report(&stable)?;
    Ok(format!(
        "input: {}\nstabilize: moves={}\nfinal: {} stable={}\n",
        summary(&config)?,
        trace.len(),
        summary(&stable)?,
        report.stable
    ))
}

/// Everything a full reduction produced: the configurations at every
/// stage, the descent datum used, the combined move trace, the final
/// stability certificate, and the arithmetic genus recorded at each
/// stage (the audit requires all three values to coincide).
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub input: FiberConfiguration,
    pub reduced: FiberConfiguration,
    pub stable: FiberConfiguration,
    pub descent: DescentData,
    pub trace: MoveTrace,
    pub stability: StabilityReport,
    pub genus_audit: [u64; 3],
}

impl PipelineResult {
    pub fn audit_holds(&self) -> bool {
        let [a, b, c] = self.genus_audit;
        a == b && b == c && self.stability.stable
    }
}

/// Validate, base change, stabilize; refuses to return a result whose
/// genus audit fails.
pub fn run_reduce(
    config: &FiberConfiguration,
    n: Option<u64>,
    descent_file: Option<&Path>,
    max_results: usize,
) -> Result<(PipelineResult, String), CliError> {
    ensure_pipeline_input(config)?;
    let input_genus = arithmetic_genus(config)?;
    let (descent, note) = resolve_descent(config, n, descent_file, max_results)?;
    let (reduced, bc_trace) = apply_base_change(config, &descent)?;
    let reduced_genus = arithmetic_genus(&reduced)?;
    let (stable, st_trace) = stabilize(&reduced)?;
    let final_genus = arithmetic_genus(&stable)?;
    let stability = stability_report(&stable)?;
    let mut trace = MoveTrace::default();
    trace.extend(bc_trace);
    trace.extend(st_trace);
    let result = PipelineResult {
        input: config.clone(),
        reduced,
        stable,
        descent,
        trace,
        stability,
        genus_audit: [input_genus, reduced_genus, final_genus],
    };
    if !result.audit_holds() {
        return Err(CliError::new(
            2,
            format!(
                "genus audit failed: {input_genus} -> {reduced_genus} -> {final_genus} (stable={})",
                result.stability.stable
            ),
        ));
    }
    Ok((result, note))
}

pub fn cmd_reduce(
    file: &Path,
    n: Option<u64>,
    descent_file: Option<&Path>,
    max_results: usize,
    outputs: &OutputOptions,
) -> Result<String, CliError> {
    let config = load_fiber(file)?;
    let (result, note) = run_reduce(&config, n, descent_file, max_results)?;
    outputs.emit(&result.stable, &result.trace)?;
    let bc_moves = result
        .trace
        .moves()
        .iter()
        .filter(|m| matches!(m, Move::BaseChangeSplit { .. } | Move::ChainInsert { .. }))
        .count();
    let st_moves = result.trace.len() - bc_moves;
    let [g0, g1, g2] = result.genus_audit;
    Ok(format!(
        "input: {}\n{note}\nbase change: {} moves={bc_moves}\nstabilize: moves={st_moves}\nfinal: {} stable={}\ngenus audit: {g0} -> {g1} -> {g2} ok\n",
        summary(&result.input)?,
        summary(&result.reduced)?,
        summary(&result.stable)?,
        result.stability.stable
    ))
}

pub fn cmd_numerology(genus: &str, hilbert: Option<&str>) -> Result<String, CliError> {
    let genus: BigUint = genus
        .parse()
        .map_err(|_| CliError::new(1, format!("malformed genus {genus:?}")))?;
    let record = genus_formulas(&genus)?;
    let mut out = String::new();
    writeln!(out, "genus={}", record.genus).unwrap();
    writeln!(out, "moduli_dimension={}", record.moduli_dimension).unwrap();
    writeln!(out, "canonical_degree={}", record.canonical_degree).unwrap();
    writeln!(
        out,
        "tricanonical_dimension={}",
        record.tricanonical_dimension
    )
    .unwrap();
    writeln!(out, "embedding_target={}", record.embedding_target).unwrap();
    writeln!(out, "hurwitz_bound={}", record.hurwitz_bound).unwrap();
    writeln!(out, "severi_min_degree={}", record.severi_min_degree).unwrap();
    writeln!(
        out,
        "tricanonical_very_ample={}",
        record.tricanonical_very_ample
    )
    .unwrap();
    if let Some(n) = hilbert {
        let n: BigUint = n
            .parse()
            .map_err(|_| CliError::new(1, format!("malformed twisting exponent {n:?}")))?;
        writeln!(
            out,
            "hilbert_polynomial={}",
            hilbert_polynomial(&genus, &n)?
        )
        .unwrap();
    }
    Ok(out)
}

pub fn cmd_enumerate(genus: u64, max_vertices: usize) -> Result<String, CliError> {
    let forms = enumerate_stable_graphs(genus, max_vertices)?;
    let mut out = String::new();
    for form in forms {
        out.push_str(&form);
        out.push('\n');
    }
    Ok(out)
}

pub fn cmd_dot(file: &Path, output: Option<&Path>) -> Result<String, CliError> {
    let config = load_fiber(file)?;
    let report = config.validate();
    if !report.is_valid() {
        return Err(CliError::new(
            1,
            format!("invalid configuration:\n{report}"),
        ));
    }
    let text = emit_dot(&config)?;
    match output {
        Some(path) => {
            write(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

pub fn cmd_local_node(a: u64, b: u64, n: u64) -> Result<String, CliError> {
    let r = node_base_change(a, b, n)?;
    Ok(format!(
        "branches={}\nalpha={}\nbeta={}\nchain_exponent={}\nchain_length={}\nsingularity={}\n",
        r.branch_count,
        r.alpha,
        r.beta,
        r.chain_exponent,
        r.chain_length,
        r.singularity_label()
    ))
}

pub fn cmd_local_split(a: u64, n: u64) -> Result<String, CliError> {
    let s = split_smooth_point(a, n)?;
    Ok(format!(
        "sheets={}\nexponent={}\nmultiplicity={}\n",
        s.sheet_count, s.sheet_exponent, s.resulting_multiplicity
    ))
}

pub fn cmd_local_witness(a: u64, b: u64) -> Result<String, CliError> {
    let w = normalization_witness(a, b)?;
    let mut out = format!("injective={}\n", w.injective);
    if let Some((zeta, xi)) = w.witness {
        out.push_str(&format!("zeta={zeta}\nxi={xi}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_reduce_collects_all_stages() {
        let config = parse_fiber(
            "fiber kind=nc\n\
             component C genus=0 mult=2\n\
             component T0 genus=0 mult=1\n\
             component T1 genus=0 mult=1\n\
             component T2 genus=0 mult=1\n\
             component T3 genus=0 mult=1\n\
             component T4 genus=0 mult=1\n\
             component T5 genus=0 mult=1\n\
             node C T0\nnode C T1\nnode C T2\nnode C T3\nnode C T4\nnode C T5\n",
        )
        .unwrap();
        let (result, note) = run_reduce(&config, None, None, 4).unwrap();
        assert!(note.contains("N=2"));
        assert_eq!(result.genus_audit, [2, 2, 2]);
        assert!(result.audit_holds());
        assert_eq!(result.descent.base_exponent(), 2);
        assert_eq!(result.reduced.component_count(), 7);
        assert_eq!(result.stable.component_count(), 1);
        assert_eq!(result.trace.len(), 13);
        // the recorded trace reproduces the stable model from the input
        let replayed = result
            .trace
            .replay(&result.input, FiberKind::StableCandidate)
            .unwrap();
        assert_eq!(replayed.edges(), result.stable.edges());
    }

    #[test]
    fn run_reduce_is_an_identity_on_stable_input() {
        let config = parse_fiber(
            "fiber kind=stable genus=2\n\
             component A genus=0 mult=1\n\
             component B genus=0 mult=1\n\
             node A B\nnode A B\nnode A B\n",
        )
        .unwrap();
        let (result, _) = run_reduce(&config, None, None, 4).unwrap();
        assert!(result.trace.is_empty());
        assert_eq!(result.stable.edges(), config.edges());
    }
}
