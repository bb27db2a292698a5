//! Exact-rational algebra: multi-indices, truncated power series in one and
//! several variables, homogeneous polynomials, and univariate polynomials.

mod homogeneous;
mod mjet;
mod multiindex;
mod ujet;
mod upoly;

pub use homogeneous::HomogeneousPoly;
pub use mjet::{compose_many, MJet};
pub use multiindex::{
    ambient_dim, binomial, canonical_index, canonical_indices, monomials_of_weight,
    monomials_up_to, MultiIndex,
};
pub use ujet::UJet;
pub use upoly::UPoly;

use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Rat = num_rational::BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(v: i64) -> Rat {
    Rat::from_integer(v.into())
}

/// Shorthand for the rational `num/den`.
pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(num.into(), den.into())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("variable count mismatch: {0} vs {1}")]
    VariableMismatch(usize, usize),
    #[error("truncation mismatch: {0} vs {1}")]
    TruncationMismatch(u32, u32),
    #[error("exponent has {0} entries but the ambient has {1} variables")]
    ArityMismatch(usize, usize),
    #[error("weight {weight} outside the admissible range 1..={max}")]
    WeightOutOfRange { weight: u32, max: u32 },
    #[error("degree {0} exceeds truncation {1}")]
    DegreeOutOfRange(u32, u32),
    #[error("not a unit: constant term is zero")]
    NotAUnit,
    #[error("substitution must preserve the origin")]
    OriginNotPreserved,
    #[error("jet not reversible: needs f(0) = 0 and f'(0) != 0")]
    NotReversible,
    #[error("homogeneous degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("exponent weight {0} does not match homogeneous degree {1}")]
    WeightDegreeMismatch(u32, u32),
}
