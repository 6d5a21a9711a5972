//! Local effect of the base change t -> t^N at a point of the central
//! fiber.
//!
//! At a smooth point of a multiplicity-a component the pulled-back
//! equation u^a = t^N factors into a sheets u = zeta * t^(N/a), each of
//! multiplicity 1. At a node where branches of multiplicities a and b
//! meet, the pullback splits into d = gcd(a, b) pieces, each an A_{m-1}
//! double-point singularity with m = N / lcm(a, b); resolving it inserts
//! a chain of m - 1 rational curves of multiplicity 1.
//!
//! Roots of unity are carried as exact exponent classes, never as
//! floating-point numbers.

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalError {
    #[error("{divisor} does not divide {value}")]
    NotDivisible { divisor: u64, value: u64 },
    #[error("parameters must be positive")]
    ZeroParameter,
}

fn positive(values: &[u64]) -> Result<(), LocalError> {
    if values.contains(&0) {
        Err(LocalError::ZeroParameter)
    } else {
        Ok(())
    }
}

/// Splitting of a smooth point of a multiplicity-`a` component under
/// t -> t^N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SheetSplitting {
    /// Number of sheets, one per a-th root of unity.
    pub sheet_count: u64,
    /// Local exponent of each sheet: u = zeta * t^(N/a).
    pub sheet_exponent: u64,
    /// Sheets are reduced; always 1.
    pub resulting_multiplicity: u64,
}

/// Splits a smooth point of a multiplicity-`a` component; requires a | N.
pub fn split_smooth_point(a: u64, n: u64) -> Result<SheetSplitting, LocalError> {
    positive(&[a, n])?;
    if !n.is_multiple_of(a) {
        return Err(LocalError::NotDivisible {
            divisor: a,
            value: n,
        });
    }
    Ok(SheetSplitting {
        sheet_count: a,
        sheet_exponent: n / a,
        resulting_multiplicity: 1,
    })
}

/// Outcome of the base change at a node of branch multiplicities (a, b).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeBaseChangeResult {
    /// d = gcd(a, b): the node splits into this many pieces.
    pub branch_count: u64,
    /// a = d * alpha with gcd(alpha, beta) = 1.
    pub alpha: u64,
    /// b = d * beta.
    pub beta: u64,
    /// m = N / lcm(a, b); each piece is an A_{m-1} point.
    pub chain_exponent: u64,
    /// Resolving A_{m-1} inserts m - 1 rational multiplicity-1 curves.
    pub chain_length: u64,
}

impl NodeBaseChangeResult {
    /// "A_{m-1}" for m >= 2; the pullback is already an ordinary node
    /// when m = 1, labeled "smooth" to keep traces unambiguous.
    pub fn singularity_label(&self) -> String {
        if self.chain_exponent == 1 {
            "smooth".to_string()
        } else {
            format!("A_{}", self.chain_exponent - 1)
        }
    }
}

/// Local model at a node under t -> t^N; requires lcm(a, b) | N.
pub fn node_base_change(a: u64, b: u64, n: u64) -> Result<NodeBaseChangeResult, LocalError> {
    positive(&[a, b, n])?;
    let d = a.gcd(&b);
    let lcm = a.lcm(&b);
    if !n.is_multiple_of(lcm) {
        return Err(LocalError::NotDivisible {
            divisor: lcm,
            value: n,
        });
    }
    let m = n / lcm;
    Ok(NodeBaseChangeResult {
        branch_count: d,
        alpha: a / d,
        beta: b / d,
        chain_exponent: m,
        chain_length: m - 1,
    })
}

/// A root of unity e^(2*pi*i*numerator/order), stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootOfUnity {
    pub numerator: u64,
    pub order: u64,
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.numerator % self.order;
        if num == 0 {
            write!(f, "1")
        } else if 2 * num == self.order {
            write!(f, "-1")
        } else {
            write!(f, "e(2*pi*i*{}/{})", num, self.order)
        }
    }
}

/// Result of checking generic injectivity of the normalization map
/// (x, y, t) -> (x^b, y^a, t) of the surface u^a v^b = t^(ab*m).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizationWitness {
    pub injective: bool,
    /// A nontrivial solution (zeta, xi) of zeta^b = xi^a = zeta*xi = 1
    /// when one exists.
    pub witness: Option<(RootOfUnity, RootOfUnity)>,
}

/// Enumerates the fiber of the normalization map over a generic point.
///
/// zeta ranges over b-th roots of unity (exponent p mod b) and xi over
/// a-th roots (exponent q mod a); the pair survives iff
/// zeta * xi = 1, i.e. p*a + q*b = 0 mod a*b. The map is injective iff
/// (1, 1) is the only solution, which happens exactly when gcd(a,b) = 1.
pub fn normalization_witness(a: u64, b: u64) -> Result<NormalizationWitness, LocalError> {
    positive(&[a, b])?;
    let modulus = a as u128 * b as u128;
    for p in 0..b {
        for q in 0..a {
            if (p, q) == (0, 0) {
                continue;
            }
            let sum = p as u128 * a as u128 + q as u128 * b as u128;
            if sum.is_multiple_of(modulus) {
                return Ok(NormalizationWitness {
                    injective: false,
                    witness: Some((
                        RootOfUnity {
                            numerator: p,
                            order: b,
                        },
                        RootOfUnity {
                            numerator: q,
                            order: a,
                        },
                    )),
                });
            }
        }
    }
    Ok(NormalizationWitness {
        injective: true,
        witness: None,
    })
}
