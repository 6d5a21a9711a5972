//! Text formats: fiber files, descent files, and trace serialization.
//!
//! Fiber grammar (UTF-8, LF, `#` starts a comment running to end of
//! line, blank lines ignored):
//!
//! ```text
//! fiber kind=<nc|reduced|stable> [genus=<uint>]
//! component <id> genus=<uint> mult=<uint>
//! node <id> <id>
//! ```
//!
//! The `fiber` header is the first directive; components must be
//! declared before any node mentions them; ids match `[A-Za-z0-9_.-]+`.
//!
//! Descent grammar (same lexical rules):
//!
//! ```text
//! descent N=<uint>
//! cover <component-id> piece degree=<uint>
//! match <edge-index> <branch-index> <left-piece-index> <right-piece-index>
//! ```
//!
//! One `cover` line per piece, in order; components without cover lines
//! default to a single full-degree piece. Edge indices refer to the
//! sorted node list (as printed by `invariants`); `match` lines are
//! optional per edge but must then cover every branch exactly once, the
//! left side being the edge's smaller endpoint. Missing matchings use
//! index order.
//!
//! Trace lines are `<step> <MOVE> ...` with step numbers from 1:
//!
//! ```text
//! 1 SPLIT C -> C.sheet1:deg=2:g=2
//! 2 CHAIN C--T0 branch 0 -> C.sheet1 T0
//! 3 CONTRACT1 T0 -> C.sheet1
//! 4 CONTRACT2 e -> A B
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use stabred_core::{
    Component, ComponentId, DescentData, FiberConfiguration, FiberKind, Move, MoveTrace,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

pub fn kind_token(kind: FiberKind) -> &'static str {
    match kind {
        FiberKind::NormalCrossings => "nc",
        FiberKind::Reduced => "reduced",
        FiberKind::StableCandidate => "stable",
    }
}

fn parse_kind(token: &str) -> Option<FiberKind> {
    match token {
        "nc" => Some(FiberKind::NormalCrossings),
        "reduced" => Some(FiberKind::Reduced),
        "stable" => Some(FiberKind::StableCandidate),
        _ => None,
    }
}

/// Splits `key=value`, returning the value for the expected key.
fn keyed<'a>(token: &'a str, key: &str, line: usize) -> Result<&'a str, ParseError> {
    match token.split_once('=') {
        Some((k, v)) if k == key => Ok(v),
        _ => Err(ParseError::new(
            line,
            format!("expected {key}=<value>, found {token:?}"),
        )),
    }
}

fn parse_u64(value: &str, what: &str, line: usize) -> Result<u64, ParseError> {
    value
        .parse::<u64>()
        .map_err(|_| ParseError::new(line, format!("malformed {what} {value:?}")))
}

fn parse_id(token: &str, line: usize) -> Result<ComponentId, ParseError> {
    ComponentId::new(token)
        .map_err(|_| ParseError::new(line, format!("invalid component id {token:?}")))
}

/// Strips the comment and yields the payload tokens of each line.
fn directives(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let payload = raw.split('#').next().unwrap_or("").trim();
        if payload.is_empty() {
            None
        } else {
            Some((idx + 1, payload.split_whitespace().collect()))
        }
    })
}

pub fn parse_fiber(text: &str) -> Result<FiberConfiguration, ParseError> {
    let mut header: Option<(FiberKind, Option<u64>)> = None;
    let mut components: Vec<(ComponentId, Component)> = Vec::new();
    let mut declared: BTreeSet<ComponentId> = BTreeSet::new();
    let mut edges: Vec<(ComponentId, ComponentId)> = Vec::new();
    let mut last_line = 0usize;

    for (line, tokens) in directives(text) {
        last_line = line;
        if header.is_none() {
            if tokens[0] != "fiber" {
                return Err(ParseError::new(
                    line,
                    format!("expected the fiber header first, found {:?}", tokens[0]),
                ));
            }
            if tokens.len() < 2 || tokens.len() > 3 {
                return Err(ParseError::new(
                    line,
                    "fiber header takes kind=<nc|reduced|stable> and optional genus=<uint>",
                ));
            }
            let kind_value = keyed(tokens[1], "kind", line)?;
            let kind = parse_kind(kind_value).ok_or_else(|| {
                ParseError::new(line, format!("unknown fiber kind {kind_value:?}"))
            })?;
            let genus = match tokens.get(2) {
                Some(token) => Some(parse_u64(keyed(token, "genus", line)?, "genus", line)?),
                None => None,
            };
            header = Some((kind, genus));
            continue;
        }
        match tokens[0] {
            "fiber" => {
                return Err(ParseError::new(line, "duplicate fiber header"));
            }
            "component" => {
                if tokens.len() != 4 {
                    return Err(ParseError::new(
                        line,
                        "component takes <id> genus=<uint> mult=<uint>",
                    ));
                }
                let id = parse_id(tokens[1], line)?;
                if !declared.insert(id.clone()) {
                    return Err(ParseError::new(line, format!("duplicate component {id}")));
                }
                let genus = parse_u64(keyed(tokens[2], "genus", line)?, "genus", line)?;
                let mult = parse_u64(keyed(tokens[3], "mult", line)?, "multiplicity", line)?;
                if mult == 0 {
                    return Err(ParseError::new(line, "multiplicity must be positive"));
                }
                components.push((
                    id,
                    Component {
                        genus,
                        multiplicity: mult,
                    },
                ));
            }
            "node" => {
                if tokens.len() != 3 {
                    return Err(ParseError::new(line, "node takes two component ids"));
                }
                let a = parse_id(tokens[1], line)?;
                let b = parse_id(tokens[2], line)?;
                for id in [&a, &b] {
                    if !declared.contains(id) {
                        return Err(ParseError::new(
                            line,
                            format!("node references undeclared component {id}"),
                        ));
                    }
                }
                edges.push((a, b));
            }
            other => {
                return Err(ParseError::new(
                    line,
                    format!("unknown directive {other:?}"),
                ));
            }
        }
    }

    let (kind, genus) = header.ok_or_else(|| ParseError::new(1, "missing fiber header"))?;
    FiberConfiguration::new(kind, genus, components, edges)
        .map_err(|e| ParseError::new(last_line.max(1), e.to_string()))
}

/// Canonical serialization: header, components in id order, nodes in
/// sorted order. `parse_fiber` of the result reproduces the
/// configuration, and serializing again reproduces the bytes.
pub fn serialize_fiber(config: &FiberConfiguration) -> String {
    let mut out = String::new();
    out.push_str("fiber kind=");
    out.push_str(kind_token(config.kind()));
    if let Some(genus) = config.declared_genus() {
        out.push_str(&format!(" genus={genus}"));
    }
    out.push('\n');
    for (id, comp) in config.components() {
        out.push_str(&format!(
            "component {id} genus={} mult={}\n",
            comp.genus, comp.multiplicity
        ));
    }
    for e in config.edges() {
        let (a, b) = e.endpoints();
        out.push_str(&format!("node {a} {b}\n"));
    }
    out
}

/// Per edge: the line where its matching started and the
/// (branch, left, right) triples seen so far.
type MatchLines = BTreeMap<usize, (usize, Vec<(usize, usize, usize)>)>;

pub fn parse_descent(text: &str, config: &FiberConfiguration) -> Result<DescentData, ParseError> {
    let mut base_exponent: Option<u64> = None;
    let mut pieces: BTreeMap<ComponentId, Vec<u64>> = BTreeMap::new();
    let mut match_lines: MatchLines = BTreeMap::new();

    for (line, tokens) in directives(text) {
        if base_exponent.is_none() {
            if tokens[0] != "descent" || tokens.len() != 2 {
                return Err(ParseError::new(
                    line,
                    "expected the descent header: descent N=<uint>",
                ));
            }
            let n = parse_u64(keyed(tokens[1], "N", line)?, "base exponent", line)?;
            if n == 0 {
                return Err(ParseError::new(line, "base exponent must be positive"));
            }
            base_exponent = Some(n);
            continue;
        }
        match tokens[0] {
            "descent" => return Err(ParseError::new(line, "duplicate descent header")),
            "cover" => {
                if tokens.len() != 4 || tokens[2] != "piece" {
                    return Err(ParseError::new(
                        line,
                        "cover takes <component-id> piece degree=<uint>",
                    ));
                }
                let id = parse_id(tokens[1], line)?;
                if !config.contains(&id) {
                    return Err(ParseError::new(
                        line,
                        format!("cover references unknown component {id}"),
                    ));
                }
                let degree = parse_u64(keyed(tokens[3], "degree", line)?, "degree", line)?;
                if degree == 0 {
                    return Err(ParseError::new(line, "piece degree must be positive"));
                }
                pieces.entry(id).or_default().push(degree);
            }
            "match" => {
                if tokens.len() != 5 {
                    return Err(ParseError::new(
                        line,
                        "match takes <edge-index> <branch-index> <left-piece-index> <right-piece-index>",
                    ));
                }
                let mut numbers = [0usize; 4];
                for (slot, token) in numbers.iter_mut().zip(&tokens[1..]) {
                    *slot = token
                        .parse::<usize>()
                        .map_err(|_| ParseError::new(line, format!("malformed index {token:?}")))?;
                }
                let [edge, branch, left, right] = numbers;
                if edge >= config.edge_count() {
                    return Err(ParseError::new(
                        line,
                        format!(
                            "edge index {edge} out of range ({} nodes)",
                            config.edge_count()
                        ),
                    ));
                }
                let (aid, bid) = config.edges()[edge].endpoints();
                let na = config.component(aid).expect("endpoint").multiplicity;
                let nb = config.component(bid).expect("endpoint").multiplicity;
                let branches = na.gcd(&nb) as usize;
                if branch >= branches {
                    return Err(ParseError::new(
                        line,
                        format!("edge {edge} has {branches} branches, index {branch} out of range"),
                    ));
                }
                let entry = match_lines.entry(edge).or_insert((line, Vec::new()));
                if entry.1.iter().any(|&(b, _, _)| b == branch) {
                    return Err(ParseError::new(
                        line,
                        format!("duplicate match entry for edge {edge} branch {branch}"),
                    ));
                }
                entry.1.push((branch, left, right));
            }
            other => {
                return Err(ParseError::new(
                    line,
                    format!("unknown directive {other:?}"),
                ));
            }
        }
    }

    let base_exponent =
        base_exponent.ok_or_else(|| ParseError::new(1, "missing descent header"))?;

    for (id, comp) in config.components() {
        pieces
            .entry(id.clone())
            .or_insert_with(|| vec![comp.multiplicity]);
    }

    let mut matchings: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (edge, (first_line, mut entries)) in match_lines {
        let (aid, bid) = config.edges()[edge].endpoints();
        let na = config.component(aid).expect("endpoint").multiplicity;
        let nb = config.component(bid).expect("endpoint").multiplicity;
        let branches = na.gcd(&nb) as usize;
        if entries.len() != branches {
            return Err(ParseError::new(
                first_line,
                format!(
                    "edge {edge}: matching covers {} of {branches} branches",
                    entries.len()
                ),
            ));
        }
        entries.sort_unstable();
        matchings.insert(edge, entries.into_iter().map(|(_, l, r)| (l, r)).collect());
    }

    Ok(DescentData::new(base_exponent, pieces, matchings))
}

/// One line per move, numbered from 1.
pub fn format_trace(trace: &MoveTrace) -> String {
    let mut out = String::new();
    for (i, mv) in trace.moves().iter().enumerate() {
        let step = i + 1;
        match mv {
            Move::BaseChangeSplit { parent, pieces } => {
                out.push_str(&format!("{step} SPLIT {parent} ->"));
                for piece in pieces {
                    out.push_str(&format!(
                        " {}:deg={}:g={}",
                        piece.id, piece.degree, piece.genus
                    ));
                }
            }
            Move::ChainInsert {
                edge,
                branch,
                left,
                right,
                inserted,
            } => {
                out.push_str(&format!(
                    "{step} CHAIN {}--{} branch {branch} -> {left}",
                    edge.0, edge.1
                ));
                for id in inserted {
                    out.push_str(&format!(" {id}"));
                }
                out.push_str(&format!(" {right}"));
            }
            Move::ContractValence1 { id, neighbor } => {
                out.push_str(&format!("{step} CONTRACT1 {id} -> {neighbor}"));
            }
            Move::ContractValence2 { id, left, right } => {
                out.push_str(&format!("{step} CONTRACT2 {id} -> {left} {right}"));
            }
        }
        out.push('\n');
    }
    out
}
