//! Rational normal curves: polynomial parametrizations, parameter
//! normalization, the degree-induction rigidity check, and recovery of a
//! degree-bounded rational representation from a curve jet.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{AlgebraError, Rat, UPoly};
use crate::germ::{CurveJet, GermError};
use crate::linalg::{exact_rank, solve, Mat, SolveOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RncError {
    #[error("curve does not lie in the affine chart: denominator vanishes at 0")]
    CurveNotInChart,
    #[error("curve has a degenerate tangent: first coordinate has zero derivative at 0")]
    BadTangent,
    #[error("curve does not pass through the chart origin")]
    NotThroughOrigin,
    #[error("curve is not in normalized form")]
    NotNormalized,
    #[error("graph-form hypothesis not met: component {component} deviates at order {order}")]
    HypothesisNotMet { component: usize, order: u32 },
    #[error("jet order {got} insufficient: need at least {need}")]
    InsufficientOrder { got: u32, need: u32 },
    #[error("polynomial degree {0} exceeds the bound {1}")]
    DegreeTooHigh(usize, u32),
    #[error("expected {expected} coordinate polynomials, found {found}")]
    WrongArity { expected: usize, found: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Germ(#[from] GermError),
}

/// Rational curve of degree at most `q`: coordinate polynomials
/// `X_0, ..., X_d` of degree `<= q`, the affine curve being
/// `x_j(t) = X_j(t) / X_0(t)`. For an abstract curve `d = q`; for a curve
/// embedded in a larger ambient `d` is the ambient dimension.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RncPoly {
    q: u32,
    polys: Vec<UPoly>,
}

impl RncPoly {
    pub fn new(q: u32, polys: Vec<UPoly>) -> Result<Self, RncError> {
        if polys.is_empty() || polys[0].is_zero() {
            return Err(RncError::CurveNotInChart);
        }
        for p in &polys {
            if let Some(d) = p.degree() {
                if d as u32 > q {
                    return Err(RncError::DegreeTooHigh(d, q));
                }
            }
        }
        Ok(RncPoly { q, polys })
    }

    /// The standard moment curve `(1, t, t^2, ..., t^q)`.
    pub fn moment_curve(q: u32) -> Self {
        let polys = (0..=q as usize).map(UPoly::monomial).collect();
        RncPoly { q, polys }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of affine coordinates (`d`, excluding the denominator).
    pub fn coords(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn polys(&self) -> &[UPoly] {
        &self.polys
    }

    pub fn denominator(&self) -> &UPoly {
        &self.polys[0]
    }

    /// Rescale the whole tuple by a nonzero scalar (a projective move).
    pub fn rescale(&self, factor: &Rat) -> RncPoly {
        RncPoly { q: self.q, polys: self.polys.iter().map(|p| p.scale(factor)).collect() }
    }

    /// Substitute `t := a t` in every coordinate (an affine parameter move).
    pub fn substitute_scaled(&self, a: &Rat) -> RncPoly {
        RncPoly {
            q: self.q,
            polys: self.polys.iter().map(|p| p.substitute_scaled(a)).collect(),
        }
    }

    /// Affine jets `x_j = X_j / X_0` of order `trunc`, `j >= 1`.
    pub fn affine_jets(&self, trunc: u32) -> Result<CurveJet, RncError> {
        if self.polys[0].coefficient(0).is_zero() {
            return Err(RncError::CurveNotInChart);
        }
        let denom_inv = self.polys[0].jet(trunc).inverse()?;
        let mut components = Vec::with_capacity(self.coords());
        for p in &self.polys[1..] {
            let jet = p.jet(trunc).mul(&denom_inv)?;
            if !jet.vanishes_at_origin() {
                return Err(RncError::NotThroughOrigin);
            }
            components.push(jet);
        }
        Ok(CurveJet::new(trunc, components)?)
    }
}

/// Normalize so that `X_0 = 1 + O(t)` and `X_1 = t + O(t^2)`, using only a
/// projective rescale of the tuple and the affine substitution `t -> a t`.
pub fn normalize_param(c: &RncPoly) -> Result<RncPoly, RncError> {
    let x0_at_zero = c.polys[0].coefficient(0);
    if x0_at_zero.is_zero() {
        return Err(RncError::CurveNotInChart);
    }
    if c.polys.len() < 2 {
        return Err(RncError::WrongArity { expected: 2, found: c.polys.len() });
    }
    if !c.polys[1].coefficient(0).is_zero() {
        return Err(RncError::NotThroughOrigin);
    }
    let tangent = c.polys[1].coefficient(1);
    if tangent.is_zero() {
        return Err(RncError::BadTangent);
    }
    // rescale by 1/X0(0), then substitute t -> a t with a = X0(0)/X1'(0)
    let rescaled = c.rescale(&x0_at_zero.clone().recip());
    let a = x0_at_zero / tangent;
    let out = rescaled.substitute_scaled(&a);
    debug_assert!(out.polys[0].coefficient(0).is_one());
    debug_assert!(out.polys[1].coefficient(1).is_one());
    Ok(out)
}

/// How a single deviation coefficient is pinned to zero during a rigidity
/// round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RigidityConstraint {
    /// `a_j = 0` because the coordinate polynomial has degree at most `q`.
    DegreeForced { j: usize },
    /// The order-`(j+r)` coefficient of `X_j X_0^{j-1} - X_1^j`, which must
    /// vanish and equals `a_j + (j-1) a_0 - j a_1`.
    GraphRelation { j: usize, residual: Rat },
}

impl RigidityConstraint {
    pub fn satisfied(&self, coefficients: &[Rat]) -> bool {
        match self {
            RigidityConstraint::DegreeForced { j } => coefficients[*j].is_zero(),
            RigidityConstraint::GraphRelation { residual, .. } => residual.is_zero(),
        }
    }
}

/// One round of the rigidity induction: the deviations `a_j`, the
/// constraints relating them, and whether every deviation vanished.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidityRound {
    pub r: u32,
    /// `a_j` = coefficient of `t^{j+r}` in `X_j`, for `j = 0..=q`.
    pub coefficients: Vec<Rat>,
    pub constraints: Vec<RigidityConstraint>,
}

impl RigidityRound {
    pub fn all_zero(&self) -> bool {
        self.coefficients.iter().all(Rat::is_zero)
    }
}

/// Full record of the rigidity induction.
///
/// `rigid` holds exactly when every recorded deviation is zero, in which
/// case the induction concludes `X_j = t^j` for every coordinate
/// (`exact_monomials`). A curve for which some deviation survives is
/// reported, not erased; such an outcome would falsify the underlying
/// rigidity statement on admissible inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidityCertificate {
    pub q: u32,
    pub rounds: Vec<RigidityRound>,
    pub rigid: bool,
    pub exact_monomials: bool,
}

/// Run the degree induction on a normalized curve in graph form.
///
/// Preconditions: the tuple satisfies the `normalize_param` postconditions
/// and, reparametrized by its own first coordinate, obeys
/// `x_j = x_1^j + O(x_1^{q+3})` for `j = 2..=q`. A violated hypothesis is an
/// error, not a certificate. Each round `r` verifies the induction shape
/// `X_j = t^j + O(t^{j+r})`, extracts the deviations, re-derives the
/// constraint system pinning them, and records everything.
pub fn rigidity_check(c: &RncPoly) -> Result<RigidityCertificate, RncError> {
    let q = c.q;
    if c.coords() != q as usize {
        return Err(RncError::WrongArity { expected: q as usize + 1, found: c.polys.len() });
    }
    if !c.polys[0].coefficient(0).is_one()
        || !c.polys[1].coefficient(0).is_zero()
        || !c.polys[1].coefficient(1).is_one()
    {
        return Err(RncError::NotNormalized);
    }

    // Hypothesis: in the parameter tau = x_1(t), every x_j is tau^j through
    // order q+2.
    let order = q + 2;
    let jets = c.affine_jets(order)?;
    let tau_inverse = jets.components()[0].reverse()?;
    for (idx, jet) in jets.components().iter().enumerate().skip(1) {
        let j = idx + 1; // affine coordinate index
        let graph = jet.compose(&tau_inverse)?;
        for m in 0..=order {
            let expected = if m as usize == j { Rat::one() } else { Rat::zero() };
            if graph.coefficient(m) != expected {
                return Err(RncError::HypothesisNotMet { component: j, order: m });
            }
        }
    }

    // Degree induction on the coordinate polynomials.
    let mut rounds = Vec::new();
    let mut rigid = true;
    for r in 1..=q {
        // induction shape X_j = t^j + O(t^{j+r}) from the previous rounds
        for (j, p) in c.polys.iter().enumerate() {
            for m in 0..(j as u32 + r).min(q + 1) {
                let expected = if m as usize == j { Rat::one() } else { Rat::zero() };
                if p.coefficient(m as usize) != expected {
                    rigid = false;
                }
            }
        }
        let coefficients: Vec<Rat> = c
            .polys
            .iter()
            .enumerate()
            .map(|(j, p)| p.coefficient(j + r as usize))
            .collect();
        let mut constraints = Vec::new();
        for j in 1..=q as usize {
            if j as u32 + r > q {
                constraints.push(RigidityConstraint::DegreeForced { j });
            }
        }
        for j in 2..=q as usize {
            if j as u32 + r > q + 2 {
                continue;
            }
            // order-(j+r) coefficient of X_j X_0^{j-1} - X_1^j
            let lhs = c.polys[j].mul(&c.polys[0].pow(j as u32 - 1));
            let rhs = c.polys[1].pow(j as u32);
            let residual = lhs.sub(&rhs).coefficient(j + r as usize);
            // the derivation identity: residual equals a_j + (j-1)a_0 - j a_1
            let derived = &coefficients[j]
                + (&coefficients[0] * Rat::from_integer(((j - 1) as i64).into()))
                - (&coefficients[1] * Rat::from_integer((j as i64).into()));
            if residual != derived {
                // only possible when the induction shape already failed
                rigid = false;
            }
            constraints.push(RigidityConstraint::GraphRelation { j, residual });
        }
        let round = RigidityRound { r, coefficients, constraints };
        if !round.all_zero() || round.constraints.iter().any(|c| !c.satisfied(&round.coefficients)) {
            rigid = false;
        }
        rounds.push(round);
    }

    let exact_monomials = c
        .polys
        .iter()
        .enumerate()
        .all(|(j, p)| *p == UPoly::monomial(j));
    Ok(RigidityCertificate { q, rounds, rigid: rigid && exact_monomials, exact_monomials })
}

/// Recover the degree-`q` rational representation of a curve jet, when one
/// exists.
///
/// Solves the shared-denominator linear system
/// `x_j(t) X_0(t) = X_j(t) mod t^{T+1}` with `deg X_j <= q` and
/// `X_0(0) = 1`, then demands the classical conditions for a degree-`q`
/// curve spanning a `P^q`: the coordinate polynomials span a space of
/// dimension exactly `q + 1` and have trivial common divisor. Any failure
/// returns `None`; a jet of order below `2q + 2` is an error since the
/// solve is only then determined.
pub fn fit_rnc(curve: &CurveJet, q: u32) -> Result<Option<RncPoly>, RncError> {
    let trunc = curve.trunc();
    let need = 2 * q + 2;
    if trunc < need {
        return Err(RncError::InsufficientOrder { got: trunc, need });
    }
    if !curve
        .components()
        .iter()
        .any(|c| !c.coefficient(1).is_zero())
    {
        return Err(RncError::BadTangent);
    }

    // unknowns: coefficients c_1..c_q of X_0 = 1 + c_1 t + ... + c_q t^q
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();
    for jet in curve.components() {
        for m in (q + 1)..=trunc {
            let row: Vec<Rat> = (1..=q)
                .map(|k| {
                    if k <= m {
                        jet.coefficient(m - k)
                    } else {
                        Rat::zero()
                    }
                })
                .collect();
            rows.push(row);
            rhs.push(-jet.coefficient(m));
        }
    }
    let solution = match solve(&Mat::from_rows(rows), &rhs) {
        SolveOutcome::Inconsistent => return Ok(None),
        SolveOutcome::Solved { solution, .. } => solution,
    };
    let mut denom_coeffs = vec![Rat::one()];
    denom_coeffs.extend(solution);
    let denominator = UPoly::from_coeffs(denom_coeffs);

    let denom_jet = denominator.jet(trunc);
    let mut polys = vec![denominator.clone()];
    for jet in curve.components() {
        let product = jet.mul(&denom_jet)?;
        // the solve forces orders q+1..T of the product to vanish
        for m in (q + 1)..=trunc {
            if !product.coefficient(m).is_zero() {
                return Ok(None);
            }
        }
        let coeffs = (0..=q).map(|k| product.coefficient(k)).collect();
        polys.push(UPoly::from_coeffs(coeffs));
    }

    // span condition: the tuple must fill the full space of degree-<=q polys
    let vectors: Vec<Vec<Rat>> = polys
        .iter()
        .map(|p| (0..=q as usize).map(|k| p.coefficient(k)).collect())
        .collect();
    if exact_rank(&vectors) != q as usize + 1 {
        return Ok(None);
    }
    // base-point-freeness: trivial common divisor
    let gcd = polys
        .iter()
        .fold(UPoly::zero(), |acc, p| acc.gcd(p));
    if gcd.degree() != Some(0) {
        return Ok(None);
    }
    Ok(Some(RncPoly { q, polys }))
}
