//! Closed-form quantities attached to a genus g >= 2 curve, evaluated in
//! arbitrary precision so large genera never overflow.

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumerologyError {
    #[error("genus {0} is below 2")]
    GenusTooSmall(BigUint),
    #[error("twisting exponent must be at least 1")]
    ExponentTooSmall,
}

/// The classical numerical record of a genus-g curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumerologyRecord {
    pub genus: BigUint,
    /// 3g - 3, the number of moduli.
    pub moduli_dimension: BigUint,
    /// 2g - 2, degree of the canonical sheaf.
    pub canonical_degree: BigUint,
    /// 5g - 5, dimension of the space of tricanonical sections.
    pub tricanonical_dimension: BigUint,
    /// 5g - 6, dimension of the target projective space of the
    /// tricanonical embedding.
    pub embedding_target: BigUint,
    /// 42(2g - 2), the Hurwitz bound on automorphism counts.
    pub hurwitz_bound: BigUint,
    /// g + 1, the smallest degree in Severi's covering argument.
    pub severi_min_degree: BigUint,
    /// 3(2g - 2) >= 2g + 1, the inequality making the tricanonical sheaf
    /// very ample; holds for every g >= 2.
    pub tricanonical_very_ample: bool,
}

pub fn genus_formulas(genus: &BigUint) -> Result<NumerologyRecord, NumerologyError> {
    let two = BigUint::from(2u32);
    if genus < &two {
        return Err(NumerologyError::GenusTooSmall(genus.clone()));
    }
    let one = BigUint::one();
    let canonical_degree = two.clone() * genus - &two;
    let moduli_dimension = BigUint::from(3u32) * genus - BigUint::from(3u32);
    let tricanonical_dimension = BigUint::from(5u32) * genus - BigUint::from(5u32);
    let embedding_target = BigUint::from(5u32) * genus - BigUint::from(6u32);
    let hurwitz_bound = BigUint::from(42u32) * &canonical_degree;
    let severi_min_degree = genus + &one;
    let tricanonical_very_ample = BigUint::from(3u32) * &canonical_degree >= two * genus + one;
    Ok(NumerologyRecord {
        genus: genus.clone(),
        moduli_dimension,
        canonical_degree,
        tricanonical_dimension,
        embedding_target,
        hurwitz_bound,
        severi_min_degree,
        tricanonical_very_ample,
    })
}

/// Hilbert polynomial of the n-fold tricanonical twist: (6n - 1)(g - 1).
pub fn hilbert_polynomial(genus: &BigUint, n: &BigUint) -> Result<BigUint, NumerologyError> {
    if genus < &BigUint::from(2u32) {
        return Err(NumerologyError::GenusTooSmall(genus.clone()));
    }
    if n < &BigUint::one() {
        return Err(NumerologyError::ExponentTooSmall);
    }
    let six_n_minus_one = BigUint::from(6u32) * n - BigUint::one();
    let genus_minus_one = genus - BigUint::one();
    Ok(six_n_minus_one * genus_minus_one)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn genus_two_record() {
        let r = genus_formulas(&big(2)).unwrap();
        assert_eq!(r.moduli_dimension, big(3));
        assert_eq!(r.canonical_degree, big(2));
        assert_eq!(r.tricanonical_dimension, big(5));
        assert_eq!(r.embedding_target, big(4));
        assert_eq!(r.hurwitz_bound, big(84));
        assert_eq!(r.severi_min_degree, big(3));
        assert!(r.tricanonical_very_ample);
    }

    #[test]
    fn genus_three_record() {
        let r = genus_formulas(&big(3)).unwrap();
        assert_eq!(r.moduli_dimension, big(6));
        assert_eq!(r.canonical_degree, big(4));
        assert_eq!(r.tricanonical_dimension, big(10));
        assert_eq!(r.embedding_target, big(9));
        assert_eq!(r.hurwitz_bound, big(168));
        assert_eq!(r.severi_min_degree, big(4));
        assert!(r.tricanonical_very_ample);
    }

    #[test]
    fn genus_one_rejected() {
        assert!(matches!(
            genus_formulas(&big(1)),
            Err(NumerologyError::GenusTooSmall(_))
        ));
    }

    #[test]
    fn hilbert_values() {
        assert_eq!(hilbert_polynomial(&big(2), &big(1)).unwrap(), big(5));
        assert_eq!(hilbert_polynomial(&big(3), &big(2)).unwrap(), big(22));
        assert!(matches!(
            hilbert_polynomial(&big(2), &big(0)),
            Err(NumerologyError::ExponentTooSmall)
        ));
    }

    #[test]
    fn hilbert_at_one_is_tricanonical_dimension() {
        for g in 2..=1000u64 {
            let record = genus_formulas(&big(g)).unwrap();
            assert_eq!(
                hilbert_polynomial(&big(g), &big(1)).unwrap(),
                record.tricanonical_dimension
            );
        }
    }

    #[test]
    fn hurwitz_bound_rewrites() {
        for g in 2..=50u64 {
            let record = genus_formulas(&big(g)).unwrap();
            assert_eq!(record.hurwitz_bound, big(84) * big(g - 1));
        }
    }

    #[test]
    fn large_genus_does_not_overflow() {
        let g = BigUint::parse_bytes(b"123456789012345678901234567890", 10).unwrap();
        let r = genus_formulas(&g).unwrap();
        assert_eq!(r.hurwitz_bound, big(84) * (&g - BigUint::one()));
    }
}
