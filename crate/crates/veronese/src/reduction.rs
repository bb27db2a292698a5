//! Order-by-order normal-form reduction of a regular germ, and the decision
//! procedure built on top of it.
//!
//! A germ reduced at order `r` carries a truncation profile on its residuals
//! `x_alpha - s^alpha`, graded by the component weight relative to `r`
//! ([`ReducedGerm`]). One stage of the recurrence extracts the two
//! homogeneous correction layers ([`PGroups`]), normalizes their pivots by a
//! rescaling homography and a parameter shift ([`normalize_order_r`]),
//! solves for the tangent corrections the distinguished curves would need
//! ([`solve_distinguished`]), and advances iff every correction layer
//! vanishes. A germ that survives all stages is reparametrized into the
//! final form in which every residual is deep ([`finalize`]); the
//! accumulated homography and parameter change form a replayable witness.
//! Failures are never silent: each one carries a certificate naming the
//! violated polynomial identity with a concrete witness term.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{
    ambient_dim, monomials_of_weight, AlgebraError, HomogeneousPoly, MJet, MultiIndex, Rat,
};
use crate::germ::{
    apply_homography, check_family_pattern, veronese, CurveJet, Germ, GermError, RawGerm,
    Reparametrization,
};
use crate::linalg::Mat;
use crate::projective::{Homography, ProjectiveError};
use crate::rnc::{fit_rnc, RncError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("germ is not {q}-regular: osculating dimension {found} < {required}")]
    NotRegular { q: u32, found: usize, required: usize },
    #[error("{found} components exceed the ambient dimension {ambient}")]
    TooManyComponents { found: usize, ambient: usize },
    #[error("reduced-form profile violated: component {component} has a residual term of degree {degree}, need at least {min}")]
    ProfileViolated { component: MultiIndex, degree: u32, min: u32 },
    #[error("stage order {r} outside 1..={max}")]
    StageOutOfRange { r: u32, max: u32 },
    #[error("pivot degree bound violated at weight {weight}, variable {var}")]
    PivotBoundViolated { weight: u32, var: usize },
    #[error("truncation {trunc} too small: need at least {min}")]
    TruncationTooSmall { trunc: u32, min: u32 },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
}

/// A germ in reduced form at order `r`: residuals vanish through degree `q`
/// when `|alpha| + r <= q+1`, through `q+1` when `|alpha| + r = q+2`, and
/// through `q+2` otherwise.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReducedGerm {
    germ: Germ,
    r: u32,
}

/// Residual-depth floor demanded of a component of the given weight at
/// reduction order `r`.
fn profile_floor(weight: u32, r: u32, q: u32) -> u32 {
    if weight + r <= q + 1 {
        q + 1
    } else if weight + r == q + 2 {
        q + 2
    } else {
        q + 3
    }
}

impl ReducedGerm {
    pub fn new(germ: Germ, r: u32) -> Result<Self, ReductionError> {
        if r < 1 || r > germ.q() + 1 {
            return Err(ReductionError::StageOutOfRange { r, max: germ.q() + 1 });
        }
        let q = germ.q();
        for alpha in germ.indices() {
            let min = profile_floor(alpha.weight(), r, q);
            let residual = germ.residual(&alpha)?;
            if let Some(low) = residual.lowest_degree() {
                if low < min {
                    return Err(ReductionError::ProfileViolated {
                        component: alpha,
                        degree: low,
                        min,
                    });
                }
            }
        }
        Ok(ReducedGerm { germ, r })
    }

    pub fn germ(&self) -> &Germ {
        &self.germ
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> u32 {
        self.germ.q()
    }
}

/// The two homogeneous correction layers of a reduced germ: the degree
/// `q+1` layer on components of weight `q+1-r`, and the degree `q+2` layer
/// on components of weight `q+2-r`. The first group is absent at
/// `r = q+1`, the second at `r = 1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PGroups {
    q: u32,
    r: u32,
    low: BTreeMap<MultiIndex, HomogeneousPoly>,
    high: BTreeMap<MultiIndex, HomogeneousPoly>,
}

impl PGroups {
    /// Rebuild from parts, validating weights and degrees; used when
    /// reloading a recorded trace.
    pub fn from_parts(
        q: u32,
        r: u32,
        low: BTreeMap<MultiIndex, HomogeneousPoly>,
        high: BTreeMap<MultiIndex, HomogeneousPoly>,
    ) -> Result<Self, ReductionError> {
        if r < 1 || r > q + 1 {
            return Err(ReductionError::StageOutOfRange { r, max: q + 1 });
        }
        for (collection, weight, degree) in [
            (&low, q.checked_sub(r).map(|d| d + 1), q + 1),
            (&high, (r >= 2).then(|| q + 2 - r), q + 2),
        ] {
            match weight {
                Some(w) => {
                    for (alpha, poly) in collection.iter() {
                        if alpha.weight() != w || poly.degree() != degree {
                            return Err(ReductionError::Internal(format!(
                                "group entry {alpha:?} has the wrong weight or degree"
                            )));
                        }
                    }
                }
                None => {
                    if !collection.is_empty() {
                        return Err(ReductionError::Internal(
                            "group must be empty at this order".into(),
                        ));
                    }
                }
            }
        }
        Ok(PGroups { q, r, low, high })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Weight of the degree-(q+1) group, when present.
    pub fn low_weight(&self) -> Option<u32> {
        (self.r <= self.q).then(|| self.q + 1 - self.r)
    }

    /// Weight of the degree-(q+2) group, when present.
    pub fn high_weight(&self) -> Option<u32> {
        (self.r >= 2).then(|| self.q + 2 - self.r)
    }

    pub fn low(&self) -> &BTreeMap<MultiIndex, HomogeneousPoly> {
        &self.low
    }

    pub fn high(&self) -> &BTreeMap<MultiIndex, HomogeneousPoly> {
        &self.high
    }

    pub fn all_entries(&self) -> impl Iterator<Item = (&MultiIndex, &HomogeneousPoly)> {
        self.low.iter().chain(self.high.iter())
    }

    pub fn is_zero(&self) -> bool {
        self.all_entries().all(|(_, p)| p.is_zero())
    }
}

/// Extract the correction layers from a reduced germ.
pub fn extract_p(g: &ReducedGerm) -> Result<PGroups, ReductionError> {
    let q = g.q();
    let r = g.r();
    let n = g.germ().n();
    let mut low = BTreeMap::new();
    let mut high = BTreeMap::new();
    if r <= q {
        let weight = q + 1 - r;
        for alpha in monomials_of_weight(n, weight) {
            let layer = g.germ().residual(&alpha)?.homogeneous_part(q + 1)?;
            low.insert(alpha, layer);
        }
    }
    if r >= 2 && r <= q + 1 {
        let weight = q + 2 - r;
        for alpha in monomials_of_weight(n, weight) {
            let layer = g.germ().residual(&alpha)?.homogeneous_part(q + 2)?;
            high.insert(alpha, layer);
        }
    }
    Ok(PGroups { q, r, low, high })
}

/// Data of one normalization step: the degree-`r` form defining the
/// rescaling homography (zero when `r = 1`), the degree-`(r+1)` parameter
/// shifts, the linear fix restoring the profile on shallow components, and
/// the data-dependent intermediates kept for the trace.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NormalizationData {
    pub r: u32,
    /// Homogeneous form of degree `r` whose induced rescaling clears the
    /// second-group pivot. The associated homography is
    /// `x -> x / (1 - rescale . x)` on the weight-`r` coordinates.
    pub rescale_form: HomogeneousPoly,
    /// Parameter shifts: the change is `s_i -> s_i + shifts[i]`.
    pub shifts: Vec<HomogeneousPoly>,
    /// Linear coordinate fix applied after the shifts.
    pub linear_fix: Mat,
    /// Data part of the first shift (independent of the rescale form).
    pub carry_first: HomogeneousPoly,
    /// Data carried into the second-group pivot before the rescale solve.
    pub carry_second: Option<HomogeneousPoly>,
}

impl NormalizationData {
    /// The parameter change induced by the shifts.
    pub fn reparametrization(&self, n: usize, trunc: u32) -> Result<Reparametrization, GermError> {
        let maps = (0..n)
            .map(|i| {
                MJet::variable(n, trunc, i)
                    .add(&self.shifts[i].to_mjet(trunc))
                    .map_err(GermError::from)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Reparametrization::new(maps)
    }

    /// The rescaling homography `x -> x / (1 - rescale . x)`.
    pub fn rescale_homography(&self, n: usize, q: u32) -> Homography {
        let dim = ambient_dim(n, q);
        let mut b = vec![Rat::zero(); dim];
        for (beta, coeff) in self.rescale_form.terms() {
            let idx = crate::algebra::canonical_index(beta, n, q)
                .expect("rescale form lives on weight-r coordinates");
            b[idx] = -coeff.clone();
        }
        Homography::denominator(b)
    }

    pub fn is_trivial(&self) -> bool {
        self.rescale_form.is_zero()
            && self.shifts.iter().all(HomogeneousPoly::is_zero)
            && self.linear_fix.is_identity()
    }
}

/// Coefficient matrix of the degree-at-most-`q` part: rows are components,
/// columns the canonical monomials of weight `1..=q`.
fn degree_q_matrix(components: &[MJet], n: usize, q: u32) -> Mat {
    let indices = crate::algebra::canonical_indices(n, q);
    Mat::from_rows(
        components
            .iter()
            .map(|c| indices.iter().map(|beta| c.coefficient(beta)).collect())
            .collect(),
    )
}

/// Linear change of coordinates making the degree-at-most-`q` coefficient
/// matrix the identity. Returns the corrected germ and the homography used.
fn linear_normalization(germ: &Germ) -> Result<(Germ, Homography), ReductionError> {
    let c = degree_q_matrix(germ.components(), germ.n(), germ.q());
    let a = c.inverse().ok_or_else(|| {
        ReductionError::Internal("degree-q coefficient matrix not invertible".into())
    })?;
    let h = Homography::linear(a)?;
    let out = apply_homography(&h, germ)?;
    Ok((out, h))
}

/// Reduce a regular parametrization to order 1 by a linear homography: the
/// inverse of its degree-at-most-`q` coefficient matrix.
pub fn reduce_to_order_1(
    raw: &RawGerm,
    q: u32,
) -> Result<(ReducedGerm, Homography), ReductionError> {
    let n = raw.n();
    let required = ambient_dim(n, q);
    if raw.trunc() < q + 3 {
        return Err(ReductionError::TruncationTooSmall { trunc: raw.trunc(), min: q + 3 });
    }
    let found = raw.osculating_dimension(q);
    if found < required {
        return Err(ReductionError::NotRegular { q, found, required });
    }
    if raw.components().len() != required {
        return Err(ReductionError::TooManyComponents {
            found: raw.components().len(),
            ambient: required,
        });
    }
    let c = degree_q_matrix(raw.components(), n, q);
    let a = c
        .inverse()
        .ok_or_else(|| ReductionError::Internal("regular matrix must be invertible".into()))?;
    let h = Homography::linear(a)?;
    let components = h.apply_components(raw.components())?;
    let germ = Germ::new(n, q, raw.trunc(), components)?;
    Ok((ReducedGerm::new(germ, 1)?, h))
}

fn scale_int(p: &HomogeneousPoly, num: i64, den: i64) -> HomogeneousPoly {
    p.scale(&Rat::new(num.into(), den.into()))
}

/// Normalize the pivots of a reduced germ at order `r <= q`.
///
/// After a rescaling homography, a degree-`(r+1)` parameter shift, and a
/// linear fix on the shallow components, the pivot layers satisfy: in the
/// degree-(q+1) group both `P_(k)` and `P_(k-1;j)` have `s1`-degree at most
/// `k-2`, and in the degree-(q+2) group the principal pivot has
/// `s1`-degree at most `k-1`. For `r = 1` the rescale form is zero; for
/// `r >= 2` it is the unique degree-`r` form achieving the second bound.
pub fn normalize_order_r(
    g: &ReducedGerm,
) -> Result<(ReducedGerm, NormalizationData, Homography), ReductionError> {
    let q = g.q();
    let r = g.r();
    if r > q {
        return Err(ReductionError::StageOutOfRange { r, max: q });
    }
    let n = g.germ().n();
    let trunc = g.germ().trunc();
    let p = extract_p(g)?;
    let kappa = q + 1 - r;
    let principal = MultiIndex::pivot(n, kappa);
    let p_principal = &p.low[&principal];

    // the part of the principal pivot with s1-exponent >= kappa-1,
    // divided by s1^(kappa-1)
    let (hi, _) = p_principal.s1_split(kappa.saturating_sub(1));
    let carried = hi
        .s1_divide(kappa - 1)
        .expect("split guarantees divisibility");

    // rescale form: zero at r = 1, otherwise solved from the second group
    let (rescale_form, carry_second) = if r >= 2 {
        let kappa2 = q + 2 - r; // = kappa + 1
        let principal2 = MultiIndex::pivot(n, kappa2);
        let p2 = &p.high[&principal2];
        // data carried into the second pivot by the first-group shift
        let carry = scale_int(
            &carried.mul_monomial(&MultiIndex::pivot(n, kappa2 - 1)),
            -(kappa2 as i64),
            kappa as i64,
        );
        let shifted = p2.add(&carry)?;
        let (hi2, _) = shifted.s1_split(kappa2);
        let form = hi2
            .s1_divide(kappa2)
            .expect("split guarantees divisibility")
            .scale(&Rat::from_integer((kappa as i64).into()));
        (form, Some(carry))
    } else {
        (HomogeneousPoly::zero(n, r), None)
    };

    // first parameter shift: -(carried + s1 * rescale)/kappa
    let carry_first = scale_int(&carried, -1, kappa as i64);
    let shift_first = carried
        .add(&rescale_form.mul_var(0))?
        .scale(&Rat::new((-1i64).into(), (kappa as i64).into()));

    // remaining shifts, one per extra variable
    let mut shifts = vec![shift_first.clone()];
    for j in 1..n {
        let mixed = MultiIndex::pivot_with(n, kappa, j);
        let mut v = p.low[&mixed].clone();
        if kappa >= 2 {
            // (kappa-1) s1^(kappa-2) s_j * shift_first
            let mut exp = vec![0u32; n];
            exp[0] = kappa - 2;
            exp[j] += 1;
            let cross = shift_first
                .mul_monomial(&MultiIndex::new(exp))
                .scale(&Rat::from_integer(((kappa - 1) as i64).into()));
            v = v.add(&cross)?;
        }
        let (hi_j, _) = v.s1_split(kappa - 1);
        let w_j = hi_j
            .s1_divide(kappa - 1)
            .expect("split guarantees divisibility");
        let shift_j = w_j.add(&rescale_form.mul_var(j))?.neg();
        shifts.push(shift_j);
    }

    let data_partial = NormalizationData {
        r,
        rescale_form,
        shifts,
        linear_fix: Mat::identity(ambient_dim(n, q)),
        carry_first,
        carry_second,
    };

    // apply: rescaling homography, then the parameter shift, then the fix
    let h_rescale = data_partial.rescale_homography(n, q);
    let after_rescale = apply_homography(&h_rescale, g.germ())?;
    let psi = data_partial.reparametrization(n, trunc)?;
    let after_shift = after_rescale.reparametrize(&psi)?;
    let (fixed, h_fix) = linear_normalization(&after_shift)?;

    let data = NormalizationData { linear_fix: h_fix.linear_part().clone(), ..data_partial };
    let out = ReducedGerm::new(fixed, r)?;

    // postcondition: the pivot bounds hold exactly
    let normalized = extract_p(&out)?;
    verify_pivot_bounds(&normalized)
        .map_err(|e| ReductionError::Internal(format!("normalization failed its bounds: {e}")))?;

    let stage_homography = h_fix.compose(&h_rescale)?;
    Ok((out, data, stage_homography))
}

/// Check the normalization bounds on the pivots of the two groups.
pub fn verify_pivot_bounds(p: &PGroups) -> Result<(), ReductionError> {
    if let Some(kappa) = p.low_weight() {
        let n = p.low.keys().next().map(MultiIndex::len).unwrap_or(1);
        let principal = MultiIndex::pivot(n, kappa);
        let bound = kappa as i64 - 2;
        let check = |poly: &HomogeneousPoly, var: usize| -> Result<(), ReductionError> {
            match poly.s1_degree() {
                Some(d) if (d as i64) > bound => {
                    Err(ReductionError::PivotBoundViolated { weight: kappa, var })
                }
                _ => Ok(()),
            }
        };
        check(&p.low[&principal], 0)?;
        for j in 1..n {
            check(&p.low[&MultiIndex::pivot_with(n, kappa, j)], j)?;
        }
    }
    if let Some(kappa2) = p.high_weight() {
        let n = p.high.keys().next().map(MultiIndex::len).unwrap_or(1);
        let principal = MultiIndex::pivot(n, kappa2);
        if let Some(d) = p.high[&principal].s1_degree() {
            if d as i64 > kappa2 as i64 - 1 {
                return Err(ReductionError::PivotBoundViolated { weight: kappa2, var: 0 });
            }
        }
    }
    Ok(())
}

/// Which polynomial identity a certificate cites.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IdentityKind {
    /// The principal pivot must be divisible by `s1^weight` (the multiplier
    /// relation at the principal pivot).
    ScalingDivisibility,
    /// `a_j s1^k = P_(k) s_j - P_(k-1;j) s1` must be solvable: the right
    /// side must be divisible by `s1^k`.
    CorrectionDivisibility,
    /// The tangent corrections solved in the two groups must agree.
    SharedCorrectionMismatch,
    /// The multiplier identity at a non-pivot index fails.
    MultiplierIdentity,
    /// A residual layer of the final form is not a monomial multiple of a
    /// factor shared across its weight.
    FamilyPattern,
}

/// Certified violation: the cited identity, where it fails, the polynomial
/// evidence, and a concrete witness term. Re-verifiable from the recorded
/// correction layers without re-running the pipeline.
#[derive(Clone, PartialEq, Debug)]
pub struct PropertyPCertificate {
    pub stage: Option<u32>,
    pub identity: IdentityKind,
    pub weight: u32,
    pub var: Option<usize>,
    pub pivot: Option<MultiIndex>,
    /// Degree of the offending residual layer (family-pattern failures).
    pub layer: Option<u32>,
    /// The polynomial that must be divisible (divisibility kinds) or must
    /// vanish (identity kinds) but is not.
    pub polynomial: HomogeneousPoly,
    pub divisor_power: u32,
    pub witness_term: Option<(MultiIndex, Rat)>,
}

/// Tangent corrections and multipliers for the distinguished curves of a
/// normalized stage: corrections `a_i` of degree `r+1` (the pivot one is
/// identically zero) and one degree-`r` multiplier per group weight.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DistinguishedSolution {
    pub r: u32,
    pub corrections: Vec<HomogeneousPoly>,
    pub multipliers: BTreeMap<u32, HomogeneousPoly>,
}

impl DistinguishedSolution {
    pub fn is_zero(&self) -> bool {
        self.corrections.iter().all(HomogeneousPoly::is_zero)
            && self.multipliers.values().all(HomogeneousPoly::is_zero)
    }
}

/// Result of solving for the distinguished-curve data.
#[derive(Clone, PartialEq, Debug)]
pub enum DistinguishedOutcome {
    Solved(DistinguishedSolution),
    Violated(PropertyPCertificate),
}

/// Multiplier identity residual at index `alpha`:
/// `sum_i a_i (alpha_i s^alpha / s_i) + P_alpha - c s^alpha`.
fn multiplier_residual(
    alpha: &MultiIndex,
    p_alpha: &HomogeneousPoly,
    corrections: &[HomogeneousPoly],
    multiplier: &HomogeneousPoly,
) -> Result<HomogeneousPoly, ReductionError> {
    let mut acc = p_alpha.sub(&multiplier.mul_monomial(alpha))?;
    for (i, a_i) in corrections.iter().enumerate().skip(1) {
        let e_i = alpha.entries()[i];
        if e_i == 0 || a_i.is_zero() {
            continue;
        }
        let reduced = alpha
            .checked_div_var(i)
            .expect("nonzero entry admits division");
        let term = a_i
            .mul_monomial(&reduced)
            .scale(&Rat::from_integer((e_i as i64).into()));
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Solve the distinguished-curve constraints on normalized correction
/// layers.
///
/// For the degree-(q+1) group the corrections are solved from the pivot
/// relations by exact `s1`-power division; the degree-(q+2) group must then
/// be consistent with the same corrections. The multiplier of each group is
/// the principal pivot divided by `s1^weight`. A solution is returned iff
/// every division succeeds and the multiplier identity holds at every index
/// of both groups; otherwise the first violated identity is certified.
pub fn solve_distinguished(
    p: &PGroups,
    n: usize,
) -> Result<DistinguishedOutcome, ReductionError> {
    let q = p.q();
    let r = p.r();
    if r > q {
        return Err(ReductionError::StageOutOfRange { r, max: q });
    }
    verify_pivot_bounds(p)?;

    let kappa = q + 1 - r;
    let principal = MultiIndex::pivot(n, kappa);
    let p_principal = &p.low[&principal];

    let mut corrections = vec![HomogeneousPoly::zero(n, r + 1); n];
    let mut multipliers = BTreeMap::new();

    // corrections from the first group
    for j in 1..n {
        let mixed = MultiIndex::pivot_with(n, kappa, j);
        let numerator = p_principal
            .mul_var(j)
            .sub(&p.low[&mixed].mul_var(0))?;
        match numerator.s1_divide(kappa) {
            Some(a_j) => corrections[j] = a_j,
            None => {
                let witness_term = numerator.s1_obstruction(kappa);
                return Ok(DistinguishedOutcome::Violated(PropertyPCertificate {
                    stage: Some(r),
                    identity: IdentityKind::CorrectionDivisibility,
                    weight: kappa,
                    var: Some(j),
                    pivot: Some(mixed),
                    layer: None,
                    polynomial: numerator,
                    divisor_power: kappa,
                    witness_term,
                }));
            }
        }
    }
    // multiplier of the first group
    match p_principal.s1_divide(kappa) {
        Some(c) => {
            multipliers.insert(kappa, c);
        }
        None => {
            let witness_term = p_principal.s1_obstruction(kappa);
            return Ok(DistinguishedOutcome::Violated(PropertyPCertificate {
                stage: Some(r),
                identity: IdentityKind::ScalingDivisibility,
                weight: kappa,
                var: None,
                pivot: Some(principal),
                layer: None,
                polynomial: p_principal.clone(),
                divisor_power: kappa,
                witness_term,
            }));
        }
    }
    // multiplier identity across the first group
    for (alpha, p_alpha) in &p.low {
        let residual =
            multiplier_residual(alpha, p_alpha, &corrections, &multipliers[&kappa])?;
        if !residual.is_zero() {
            let witness_term = residual.leading_term();
            return Ok(DistinguishedOutcome::Violated(PropertyPCertificate {
                stage: Some(r),
                identity: IdentityKind::MultiplierIdentity,
                weight: kappa,
                var: None,
                pivot: Some(alpha.clone()),
                layer: None,
                polynomial: residual,
                divisor_power: 0,
                witness_term,
            }));
        }
    }

    // second group: same corrections, new multiplier
    if let Some(kappa2) = p.high_weight() {
        let principal2 = MultiIndex::pivot(n, kappa2);
        let p2 = &p.high[&principal2];
        match p2.s1_divide(kappa2) {
            Some(c) => {
                multipliers.insert(kappa2, c);
            }
            None => {
                let witness_term = p2.s1_obstruction(kappa2);
                return Ok(DistinguishedOutcome::Violated(PropertyPCertificate {
                    stage: Some(r),
                    identity: IdentityKind::ScalingDivisibility,
                    weight: kappa2,
                    var: None,
                    pivot: Some(principal2),
                    layer: None,
                    polynomial: p2.clone(),
                    divisor_power: kappa2,
                    witness_term,
                }));
            }
        }
        for j in 1..n {
            let mixed = MultiIndex::pivot_with(n, kappa2, j);
            let numerator = p2.mul_var(j).sub(&p.high[&mixed].mul_var(0))?;
            match numerator.s1_divide(kappa2) {
                None => {
                    let witness_term = numerator.s1_obstruction(kappa2);
                    return Ok(DistinguishedOutcome::Violated(PropertyPCertificate {
                        stage: Some(r),
                        identity: IdentityKind::CorrectionDivisibility,
                        weight: kappa2,
                        var: Some(j),
                        pivot: Some(mixed),
                        layer: None,
                        polynomial: numerator,
                        divisor_power: kappa2,
                        witness_term,
                    }));
                }
                Some(a_j) => {
                    if a_j != corrections[j] {
                        let difference = a_j.sub(&corrections[j])?;
                        let witness_term = difference.leading_term();
                        return Ok(DistinguishedOutcome::Violated(PropertyPCertificate {
                            stage: Some(r),
                            identity: IdentityKind::SharedCorrectionMismatch,
                            weight: kappa2,
                            var: Some(j),
                            pivot: Some(mixed),
                            layer: None,
                            polynomial: difference,
                            divisor_power: 0,
                            witness_term,
                        }));
                    }
                }
            }
        }
        for (alpha, p_alpha) in &p.high {
            let residual =
                multiplier_residual(alpha, p_alpha, &corrections, &multipliers[&kappa2])?;
            if !residual.is_zero() {
                let witness_term = residual.leading_term();
                return Ok(DistinguishedOutcome::Violated(PropertyPCertificate {
                    stage: Some(r),
                    identity: IdentityKind::MultiplierIdentity,
                    weight: kappa2,
                    var: None,
                    pivot: Some(alpha.clone()),
                    layer: None,
                    polynomial: residual,
                    divisor_power: 0,
                    witness_term,
                }));
            }
        }
    }

    Ok(DistinguishedOutcome::Solved(DistinguishedSolution {
        r,
        corrections,
        multipliers,
    }))
}

/// Stage verdict: either the germ advances to order `r+1`, or the surviving
/// correction layers certify the failure.
#[derive(Clone, PartialEq, Debug)]
pub enum StageResult {
    Advance(ReducedGerm),
    Fail {
        nonzero: Vec<MultiIndex>,
        certificate: PropertyPCertificate,
    },
}

/// Advance iff every correction layer of the normalized stage vanishes.
pub fn check_vanishing(
    g: &ReducedGerm,
    p: &PGroups,
    outcome: &DistinguishedOutcome,
) -> Result<StageResult, ReductionError> {
    let nonzero: Vec<MultiIndex> = p
        .all_entries()
        .filter(|(_, poly)| !poly.is_zero())
        .map(|(alpha, _)| alpha.clone())
        .collect();
    if nonzero.is_empty() {
        match outcome {
            DistinguishedOutcome::Solved(sol) if sol.is_zero() => {}
            _ => {
                return Err(ReductionError::Internal(
                    "vanishing layers must admit the zero solution".into(),
                ))
            }
        }
        let next = ReducedGerm::new(g.germ().clone(), g.r() + 1)?;
        Ok(StageResult::Advance(next))
    } else {
        let certificate = match outcome {
            DistinguishedOutcome::Violated(cert) => cert.clone(),
            DistinguishedOutcome::Solved(_) => {
                return Err(ReductionError::Internal(
                    "nonzero normalized layers cannot admit a solution".into(),
                ))
            }
        };
        Ok(StageResult::Fail { nonzero, certificate })
    }
}

/// Reparametrize a fully reduced germ by the inverse of its weight-1
/// component map, making the weight-1 components exactly the parameters and
/// leaving every deeper residual untouched through the truncation.
pub fn finalize(g: &ReducedGerm) -> Result<(Germ, Reparametrization), ReductionError> {
    let q = g.q();
    if g.r() != q + 1 {
        return Err(ReductionError::StageOutOfRange { r: g.r(), max: q + 1 });
    }
    let n = g.germ().n();
    let weight_one: Vec<MJet> = g.germ().components()[..n].to_vec();
    let psi = Reparametrization::new(crate::germ::invert_map(&weight_one)?)?;
    let out = g.germ().reparametrize(&psi)?;
    for i in 0..n {
        let alpha = MultiIndex::unit(n, i);
        if !out.residual(&alpha)?.is_zero() {
            return Err(ReductionError::Internal(
                "weight-1 components must be exact after reparametrization".into(),
            ));
        }
    }
    // residuals of weight >= 2 stay deep; revalidate the profile
    ReducedGerm::new(out.clone(), q + 1)?;
    Ok((out, psi))
}

/// Accumulated transformation mapping the pipeline input to its final form:
/// apply the parameter change first, then the homography.
#[derive(Clone, PartialEq, Debug)]
pub struct Witness {
    pub homography: Homography,
    pub reparam: Reparametrization,
}

impl Witness {
    pub fn identity(dim: usize, n: usize, trunc: u32) -> Self {
        Witness {
            homography: Homography::identity(dim),
            reparam: Reparametrization::identity(n, trunc),
        }
    }

    /// Replay against a raw input, producing the transformed components.
    pub fn replay(&self, raw: &RawGerm) -> Result<Vec<MJet>, ReductionError> {
        let reparametrized = raw.reparametrize(&self.reparam)?;
        Ok(self.homography.apply_components(reparametrized.components())?)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StageVerdict {
    Advance,
    Fail,
}

/// Everything recorded about one stage of the recurrence.
#[derive(Clone, PartialEq, Debug)]
pub struct StageRecord {
    pub r: u32,
    pub extracted: PGroups,
    pub normalization: NormalizationData,
    pub normalized: PGroups,
    pub solution: Option<DistinguishedSolution>,
    pub certificate: Option<PropertyPCertificate>,
    pub verdict: StageVerdict,
    pub nonzero: Vec<MultiIndex>,
}

#[derive(Clone, PartialEq, Debug)]
pub enum PipelineVerdict {
    /// Every stage advanced; the final germ is in deep-residual form.
    Reduced,
    NotQRegular,
    NotPropertyP { stage: u32 },
}

/// Full record of a pipeline run: per-stage data, the accumulated witness,
/// and the final germ. Replaying the witness against the original input
/// reproduces the final germ exactly up to the truncation.
#[derive(Clone, PartialEq, Debug)]
pub struct ReductionTrace {
    pub n: usize,
    pub q: u32,
    pub trunc: u32,
    pub osculating_dims: Vec<usize>,
    pub initial_homography: Option<Homography>,
    pub stages: Vec<StageRecord>,
    pub final_germ: Option<Germ>,
    pub witness: Witness,
    pub verdict: PipelineVerdict,
}

/// Run the whole recurrence: linear reduction to order 1, one stage per
/// order `1..=q`, then the final reparametrization. All failures are
/// verdicts inside the trace; errors are reserved for malformed inputs.
pub fn run_pipeline(raw: &RawGerm, q: u32) -> Result<ReductionTrace, ReductionError> {
    let n = raw.n();
    let trunc = raw.trunc();
    if q < 1 {
        return Err(ReductionError::StageOutOfRange { r: 0, max: 0 });
    }
    if trunc < q + 3 {
        return Err(ReductionError::TruncationTooSmall { trunc, min: q + 3 });
    }
    let required = ambient_dim(n, q);
    let osculating_dims: Vec<usize> = (1..=q).map(|k| raw.osculating_dimension(k)).collect();
    if osculating_dims[q as usize - 1] < required {
        return Ok(ReductionTrace {
            n,
            q,
            trunc,
            osculating_dims,
            initial_homography: None,
            stages: Vec::new(),
            final_germ: None,
            witness: Witness::identity(required, n, trunc),
            verdict: PipelineVerdict::NotQRegular,
        });
    }
    if raw.components().len() > required {
        return Err(ReductionError::TooManyComponents {
            found: raw.components().len(),
            ambient: required,
        });
    }

    let (mut current, h0) = reduce_to_order_1(raw, q)?;
    let mut witness = Witness {
        homography: h0.clone(),
        reparam: Reparametrization::identity(n, trunc),
    };
    let mut stages = Vec::new();
    let mut failure: Option<u32> = None;
    let mut final_germ: Option<Germ> = None;

    for r in 1..=q {
        debug_assert_eq!(current.r(), r);
        let extracted = extract_p(&current)?;
        let (normalized_germ, normalization, stage_h) = normalize_order_r(&current)?;
        let stage_psi = normalization.reparametrization(n, trunc)?;
        witness = Witness {
            homography: stage_h.compose(&witness.homography)?,
            reparam: witness.reparam.compose(&stage_psi)?,
        };
        let normalized = extract_p(&normalized_germ)?;
        let outcome = solve_distinguished(&normalized, n)?;
        let result = check_vanishing(&normalized_germ, &normalized, &outcome)?;
        let (solution, certificate) = match &outcome {
            DistinguishedOutcome::Solved(sol) => (Some(sol.clone()), None),
            DistinguishedOutcome::Violated(cert) => (None, Some(cert.clone())),
        };
        match result {
            StageResult::Advance(next) => {
                stages.push(StageRecord {
                    r,
                    extracted,
                    normalization,
                    normalized,
                    solution,
                    certificate,
                    verdict: StageVerdict::Advance,
                    nonzero: Vec::new(),
                });
                current = next;
            }
            StageResult::Fail { nonzero, certificate } => {
                stages.push(StageRecord {
                    r,
                    extracted,
                    normalization,
                    normalized,
                    solution,
                    certificate: Some(certificate),
                    verdict: StageVerdict::Fail,
                    nonzero,
                });
                failure = Some(r);
                final_germ = Some(normalized_germ.germ().clone());
                break;
            }
        }
    }

    let verdict = match failure {
        Some(stage) => PipelineVerdict::NotPropertyP { stage },
        None => {
            let (finished, psi) = finalize(&current)?;
            witness = Witness {
                homography: witness.homography,
                reparam: witness.reparam.compose(&psi)?,
            };
            final_germ = Some(finished);
            PipelineVerdict::Reduced
        }
    };

    Ok(ReductionTrace {
        n,
        q,
        trunc,
        osculating_dims,
        initial_homography: Some(h0),
        stages,
        final_germ,
        witness,
        verdict,
    })
}

/// Decision outcome for a parametrized germ.
#[derive(Clone, PartialEq, Debug)]
pub enum Verdict {
    /// The input is the standard weight-graded monomial germ up to the
    /// witness transformation recorded in the trace.
    Veronese { trace: ReductionTrace },
    NotQRegular { trace: ReductionTrace },
    NotPropertyP {
        certificate: PropertyPCertificate,
        trace: ReductionTrace,
    },
    /// The final form carries the shared residual factors of a genuine
    /// curve family, but the family is not the standard embedding: some
    /// factor is nonzero and sampled line curves fail the rational-curve
    /// fit where recorded.
    PropertyPNotVeronese {
        residual_factors: BTreeMap<u32, MJet>,
        failing_directions: Vec<Vec<Rat>>,
        trace: ReductionTrace,
    },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Veronese { .. } => "VERONESE",
            Verdict::NotQRegular { .. } => "NOT_Q_REGULAR",
            Verdict::NotPropertyP { .. } => "NOT_PROPERTY_P",
            Verdict::PropertyPNotVeronese { .. } => "PROPERTY_P_NOT_VERONESE",
        }
    }

    pub fn trace(&self) -> &ReductionTrace {
        match self {
            Verdict::Veronese { trace }
            | Verdict::NotQRegular { trace }
            | Verdict::NotPropertyP { trace, .. }
            | Verdict::PropertyPNotVeronese { trace, .. } => trace,
        }
    }

    pub fn is_veronese(&self) -> bool {
        matches!(self, Verdict::Veronese { .. })
    }
}

/// Certificate for a final form whose residuals do not follow the shared
/// weight-factor pattern.
fn family_pattern_certificate(g: &Germ) -> Result<Option<PropertyPCertificate>, ReductionError> {
    let n = g.n();
    for k in 1..=g.q() {
        let principal = MultiIndex::pivot(n, k);
        let principal_res = g.residual(&principal)?;
        // candidate factor from the principal component, None when its
        // residual is not divisible by s1^k
        let mut candidate: Option<MJet> = Some(MJet::zero(n, g.trunc()));
        for (beta, coeff) in principal_res.terms() {
            match beta.checked_sub(&principal) {
                Some(reduced) => {
                    candidate = candidate
                        .map(|c| {
                            c.add(&MJet::monomial(n, g.trunc(), reduced, coeff.clone()))
                                .expect("same shape")
                        })
                        .filter(|c| k > 1 || c.is_zero());
                }
                None => {
                    candidate = None;
                }
            }
        }
        for alpha in monomials_of_weight(n, k) {
            let residual = g.residual(&alpha)?;
            let expected = candidate.as_ref().map(|c| {
                MJet::monomial(n, g.trunc(), alpha.clone(), Rat::one())
                    .mul(c)
                    .expect("same shape")
            });
            let mismatch = match &expected {
                Some(e) => residual.sub(e)?,
                None => residual,
            };
            if !mismatch.is_zero() {
                let layer_degree = mismatch.lowest_degree().expect("nonzero");
                let layer = mismatch.homogeneous_part(layer_degree)?;
                let witness_term = layer.leading_term();
                return Ok(Some(PropertyPCertificate {
                    stage: None,
                    identity: IdentityKind::FamilyPattern,
                    weight: k,
                    var: None,
                    pivot: Some(alpha),
                    layer: Some(layer_degree),
                    polynomial: layer,
                    divisor_power: 0,
                    witness_term,
                }));
            }
        }
    }
    Ok(None)
}

/// Deterministic direction samples: the all-ones direction first, then
/// seeded nonzero integer vectors.
pub fn sample_directions(n: usize, count: usize) -> Vec<Vec<Rat>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d19e_c710_4221);
    let mut out = vec![vec![Rat::one(); n]];
    while out.len() < count {
        let sigma: Vec<Rat> = (0..n)
            .map(|_| Rat::from_integer(rng.gen_range(-3i64..=3).into()))
            .collect();
        if sigma.iter().all(Rat::is_zero) {
            continue;
        }
        if !out.contains(&sigma) {
            out.push(sigma);
        }
    }
    out.truncate(count);
    out
}

/// Decide whether a parametrized germ is the standard order-`q` embedding.
///
/// Exactly one verdict is produced: regularity failure, a certified
/// identity violation, a genuine curve family that is not the standard one,
/// or the standard embedding with a composed witness.
pub fn decide_veronese(
    raw: &RawGerm,
    q: u32,
    direction_samples: usize,
) -> Result<Verdict, ReductionError> {
    assert!(direction_samples >= 1, "need at least one direction sample");
    let trace = run_pipeline(raw, q)?;
    match trace.verdict {
        PipelineVerdict::NotQRegular => Ok(Verdict::NotQRegular { trace }),
        PipelineVerdict::NotPropertyP { stage } => {
            let certificate = trace
                .stages
                .iter()
                .find(|s| s.r == stage)
                .and_then(|s| s.certificate.clone())
                .ok_or_else(|| {
                    ReductionError::Internal("failed stage must carry a certificate".into())
                })?;
            Ok(Verdict::NotPropertyP { certificate, trace })
        }
        PipelineVerdict::Reduced => {
            let final_germ = trace
                .final_germ
                .clone()
                .ok_or_else(|| ReductionError::Internal("reduced run must carry a germ".into()))?;
            let standard = veronese(final_germ.n(), q, final_germ.trunc())?;
            if final_germ == standard {
                return Ok(Verdict::Veronese { trace });
            }
            match check_family_pattern(&final_germ) {
                None => {
                    let certificate = family_pattern_certificate(&final_germ)?.ok_or_else(|| {
                        ReductionError::Internal(
                            "pattern failure must yield a certificate".into(),
                        )
                    })?;
                    Ok(Verdict::NotPropertyP { certificate, trace })
                }
                Some(residual_factors) => {
                    let mut failing = Vec::new();
                    if final_germ.trunc() >= 2 * q + 2 {
                        for sigma in sample_directions(final_germ.n(), direction_samples) {
                            let curve: CurveJet = final_germ.line_curve(&sigma)?;
                            match fit_rnc(&curve, q) {
                                Ok(Some(_)) => {}
                                Ok(None) => failing.push(sigma),
                                Err(RncError::BadTangent) => failing.push(sigma),
                                Err(e) => return Err(ReductionError::Internal(e.to_string())),
                            }
                        }
                    }
                    Ok(Verdict::PropertyPNotVeronese {
                        residual_factors,
                        failing_directions: failing,
                        trace,
                    })
                }
            }
        }
    }
}

/// Re-verify a trace against its input without re-running the pipeline:
/// the witness replay must reproduce the final germ, regularity verdicts
/// must match a fresh rank computation, and failure certificates must be
/// genuinely violated on the recorded correction layers.
pub fn replay_trace(raw: &RawGerm, trace: &ReductionTrace) -> Result<(), String> {
    match &trace.verdict {
        PipelineVerdict::NotQRegular => {
            let required = ambient_dim(trace.n, trace.q);
            let found = raw.osculating_dimension(trace.q);
            if found >= required {
                return Err(format!(
                    "trace claims non-regularity but rank is {found} of {required}"
                ));
            }
            Ok(())
        }
        verdict => {
            let final_germ = trace
                .final_germ
                .as_ref()
                .ok_or_else(|| "trace lacks a final germ".to_string())?;
            let replayed = trace
                .witness
                .replay(raw)
                .map_err(|e| format!("witness replay failed: {e}"))?;
            if replayed != final_germ.components() {
                return Err("witness replay does not reproduce the final germ".into());
            }
            if let PipelineVerdict::NotPropertyP { stage } = verdict {
                let record = trace
                    .stages
                    .iter()
                    .find(|s| s.r == *stage)
                    .ok_or_else(|| format!("missing record for stage {stage}"))?;
                let certificate = record
                    .certificate
                    .as_ref()
                    .ok_or_else(|| "failed stage lacks a certificate".to_string())?;
                reverify_certificate(certificate, &record.normalized)?;
            }
            Ok(())
        }
    }
}

/// Check that a stage certificate names an identity genuinely violated by
/// the recorded correction layers.
pub fn reverify_certificate(
    cert: &PropertyPCertificate,
    normalized: &PGroups,
) -> Result<(), String> {
    let group = |weight: u32| -> Result<&BTreeMap<MultiIndex, HomogeneousPoly>, String> {
        if normalized.low_weight() == Some(weight) {
            Ok(normalized.low())
        } else if normalized.high_weight() == Some(weight) {
            Ok(normalized.high())
        } else {
            Err(format!("certificate weight {weight} matches no group"))
        }
    };
    match cert.identity {
        IdentityKind::ScalingDivisibility => {
            let n = cert.polynomial.n();
            let entries = group(cert.weight)?;
            let principal = MultiIndex::pivot(n, cert.weight);
            let recorded = &entries[&principal];
            if *recorded != cert.polynomial {
                return Err("certified polynomial differs from the recorded pivot".into());
            }
            if recorded.s1_divide(cert.divisor_power).is_some() {
                return Err("certified divisibility actually holds".into());
            }
            Ok(())
        }
        IdentityKind::CorrectionDivisibility => {
            let n = cert.polynomial.n();
            let entries = group(cert.weight)?;
            let j = cert.var.ok_or("missing variable index")?;
            let principal = MultiIndex::pivot(n, cert.weight);
            let mixed = MultiIndex::pivot_with(n, cert.weight, j);
            // brute-force recomputation of the numerator
            let numerator = entries[&principal]
                .mul_var(j)
                .sub(&entries[&mixed].mul_var(0))
                .map_err(|e| e.to_string())?;
            if numerator != cert.polynomial {
                return Err("certified numerator differs from recomputation".into());
            }
            match numerator.s1_obstruction(cert.divisor_power) {
                Some(term) => {
                    if cert.witness_term.as_ref() != Some(&term) {
                        return Err("witness term does not match the obstruction".into());
                    }
                    Ok(())
                }
                None => Err("certified divisibility actually holds".into()),
            }
        }
        IdentityKind::SharedCorrectionMismatch | IdentityKind::MultiplierIdentity => {
            if cert.polynomial.is_zero() {
                return Err("certified mismatch is actually zero".into());
            }
            Ok(())
        }
        IdentityKind::FamilyPattern => {
            if cert.polynomial.is_zero() {
                return Err("certified pattern mismatch is actually zero".into());
            }
            Ok(())
        }
    }
}
