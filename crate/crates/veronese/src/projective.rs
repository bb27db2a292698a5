//! Homographies of `P^N` fixing the origin, in affine-chart form.
//!
//! A transformation is stored as an invertible matrix `A` and a vector `b`;
//! it acts on the chart by `x -> (A x) / (1 + b . x)`. This is exactly the
//! stabilizer of the origin inside the projective group restricted to the
//! chart, and it is closed under composition: the pair corresponds to the
//! block matrix `[[1, b^T], [0, A]]` acting on homogeneous coordinates.

use num_traits::Zero;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{ambient_dim, AlgebraError, MJet, Rat};
use crate::linalg::Mat;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectiveError {
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("linear part is singular")]
    Singular,
    #[error("component jets must vanish at the origin")]
    NonVanishingComponent,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Projective transformation of `P^N` fixing the origin of the affine chart.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Homography {
    a: Mat,
    b: Vec<Rat>,
}

impl Homography {
    /// Build from the linear part and the denominator form, checking
    /// invertibility.
    pub fn new(a: Mat, b: Vec<Rat>) -> Result<Self, ProjectiveError> {
        if a.nrows() != a.ncols() {
            return Err(ProjectiveError::NotSquare(a.nrows(), a.ncols()));
        }
        if a.nrows() != b.len() {
            return Err(ProjectiveError::DimensionMismatch(a.nrows(), b.len()));
        }
        if a.inverse().is_none() {
            return Err(ProjectiveError::Singular);
        }
        Ok(Homography { a, b })
    }

    pub fn identity(dim: usize) -> Self {
        Homography { a: Mat::identity(dim), b: vec![Rat::zero(); dim] }
    }

    /// Purely linear transformation `x -> A x`.
    pub fn linear(a: Mat) -> Result<Self, ProjectiveError> {
        let dim = a.nrows();
        Self::new(a, vec![Rat::zero(); dim])
    }

    /// Transformation `x -> x / (1 + b . x)` with identity linear part.
    pub fn denominator(b: Vec<Rat>) -> Self {
        let dim = b.len();
        Homography { a: Mat::identity(dim), b }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn linear_part(&self) -> &Mat {
        &self.a
    }

    pub fn denominator_form(&self) -> &[Rat] {
        &self.b
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_identity() && self.b.iter().all(Rat::is_zero)
    }

    /// Composition: the result acts as `self` after `first`. Matches the
    /// product of the corresponding block matrices.
    pub fn compose(&self, first: &Homography) -> Result<Homography, ProjectiveError> {
        if self.dim() != first.dim() {
            return Err(ProjectiveError::DimensionMismatch(self.dim(), first.dim()));
        }
        let a = self.a.mul(&first.a);
        // b = b_first + A_first^T b_self
        let shifted = first.a.transpose().mul_vec(&self.b);
        let b = first
            .b
            .iter()
            .zip(shifted)
            .map(|(x, y)| x + y)
            .collect();
        Ok(Homography { a, b })
    }

    /// Two-sided inverse; invertibility is a construction invariant.
    pub fn inverse(&self) -> Homography {
        let a_inv = self.a.inverse().expect("construction guarantees invertibility");
        let b = a_inv
            .transpose()
            .mul_vec(&self.b)
            .into_iter()
            .map(|v| -v)
            .collect();
        Homography { a: a_inv, b }
    }

    /// Apply to a vector of component jets, all vanishing at the origin, so
    /// that the denominator `1 + b . x` is a unit jet.
    pub fn apply_components(&self, components: &[MJet]) -> Result<Vec<MJet>, ProjectiveError> {
        if components.len() != self.dim() {
            return Err(ProjectiveError::DimensionMismatch(components.len(), self.dim()));
        }
        if components.is_empty() {
            return Ok(Vec::new());
        }
        let n = components[0].n();
        let trunc = components[0].trunc();
        for c in components {
            if !c.vanishes_at_origin() {
                return Err(ProjectiveError::NonVanishingComponent);
            }
        }
        let mut denom = MJet::one(n, trunc);
        for (coeff, x) in self.b.iter().zip(components) {
            denom.add_assign_scaled(x, coeff)?;
        }
        let denom_inv = denom.inverse()?;
        let mut out = Vec::with_capacity(self.dim());
        for row in self.a.rows() {
            let mut numer = MJet::zero(n, trunc);
            for (coeff, x) in row.iter().zip(components) {
                numer.add_assign_scaled(x, coeff)?;
            }
            out.push(numer.mul(&denom_inv)?);
        }
        Ok(out)
    }
}

/// Uniform random rational with numerator in `-magnitude..=magnitude` and
/// denominator in `1..=magnitude`.
pub fn random_rat(rng: &mut impl Rng, magnitude: u32) -> Rat {
    if magnitude == 0 {
        return Rat::zero();
    }
    let num = rng.gen_range(-(magnitude as i64)..=magnitude as i64);
    let den = rng.gen_range(1..=magnitude as i64);
    Rat::new(num.into(), den.into())
}

/// Deterministic random homography for the ambient of parameters `(n, q)`.
/// Magnitude zero yields the identity; otherwise the linear part is a
/// sparse perturbation of the identity, resampled until invertible.
pub fn random_homography(n: usize, q: u32, seed: u64, magnitude: u32) -> Homography {
    let dim = ambient_dim(n, q);
    if magnitude == 0 {
        return Homography::identity(dim);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = loop {
        let candidate = Mat::from_rows(
            (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| {
                            if i == j {
                                random_rat(&mut rng, magnitude) + Rat::from_integer(1.into())
                            } else if rng.gen_range(0..4) == 0 {
                                random_rat(&mut rng, magnitude)
                            } else {
                                Rat::zero()
                            }
                        })
                        .collect()
                })
                .collect(),
        );
        if candidate.inverse().is_some() {
            break candidate;
        }
    };
    let b = (0..dim)
        .map(|_| {
            if rng.gen_range(0..2) == 0 {
                random_rat(&mut rng, magnitude)
            } else {
                Rat::zero()
            }
        })
        .collect();
    Homography { a, b }
}
