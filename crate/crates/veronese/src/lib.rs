//! Exact computer algebra for germs of projective varieties.
//!
//! Everything here runs over the exact rationals: truncated multivariate
//! power series, homographies of `P^N` fixing the origin, germ
//! parametrizations indexed by monomial weight, rational normal curves,
//! and an order-by-order normal-form reduction that either transforms a
//! germ into the standard Veronese parametrization (with a replayable
//! witness) or produces a certificate naming the polynomial identity the
//! germ violates.
//!
//! No floating point is used anywhere; equality of results is structural
//! equality of canonical sparse term maps.

pub mod algebra;
pub mod germ;
pub mod linalg;
pub mod projective;
pub mod reduction;
pub mod rnc;

pub use algebra::{MJet, MultiIndex, Rat, UJet};
pub use germ::{CurveJet, Germ, RawGerm, Reparametrization};
pub use projective::Homography;
pub use reduction::{ReductionTrace, Verdict};
pub use rnc::RncPoly;

