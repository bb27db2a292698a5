//! Germ parametrizations at the origin.
//!
//! A [`Germ`] is the canonical object: one component jet per multi-index of
//! weight `1..=q`, in the canonical coordinate order, every component
//! vanishing at the origin. A [`RawGerm`] is an arbitrary tuple of jets (for
//! projections and pre-reduction inputs). Alongside the types live the rank
//! operations (osculating dimension, regularity), generators for the germs
//! used throughout the test suites, and the direction-restriction machinery
//! producing [`CurveJet`]s.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{
    ambient_dim, canonical_index, canonical_indices, monomials_up_to, AlgebraError, MJet,
    MultiIndex, Rat, UJet,
};
use crate::linalg::{exact_rank, Mat};
use crate::projective::{random_rat, Homography, ProjectiveError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GermError {
    #[error("truncation {trunc} too small: need at least {min}")]
    TruncationTooSmall { trunc: u32, min: u32 },
    #[error("expected {expected} components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("component {0} does not vanish at the origin")]
    NonVanishingComponent(usize),
    #[error("components disagree on variable count or truncation")]
    InconsistentComponents,
    #[error("invalid coordinate index {0}")]
    InvalidIndex(MultiIndex),
    #[error("direction must be nonzero")]
    ZeroDirection,
    #[error("residual factor for weight {weight} must be O(|s|^{min})")]
    ResidualDegreeTooLow { weight: u32, min: u32 },
    #[error("residual weight {0} outside 2..=q")]
    InvalidWeight(u32),
    #[error("need at least one parameter and order at least 1")]
    DegenerateShape,
    #[error("parameter change must fix the origin")]
    OriginNotFixed,
    #[error("parameter change has a singular linear part")]
    SingularLinearPart,
    #[error("parameter count mismatch: expected {expected}, found {found}")]
    ParameterCount { expected: usize, found: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
}

fn validate_components(
    n: usize,
    trunc: u32,
    components: &[MJet],
) -> Result<(), GermError> {
    for (i, c) in components.iter().enumerate() {
        if c.n() != n || c.trunc() != trunc {
            return Err(GermError::InconsistentComponents);
        }
        if !c.vanishes_at_origin() {
            return Err(GermError::NonVanishingComponent(i));
        }
    }
    Ok(())
}

/// Arbitrary parametrization: a tuple of jets vanishing at the origin. The
/// component count need not match the canonical ambient.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RawGerm {
    n: usize,
    trunc: u32,
    components: Vec<MJet>,
}

impl RawGerm {
    pub fn new(n: usize, trunc: u32, components: Vec<MJet>) -> Result<Self, GermError> {
        validate_components(n, trunc, &components)?;
        Ok(RawGerm { n, trunc, components })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn components(&self) -> &[MJet] {
        &self.components
    }

    pub fn osculating_dimension(&self, k: u32) -> usize {
        osculating_dimension(&self.components, self.n, k)
    }

    pub fn is_q_regular(&self, q: u32) -> bool {
        is_q_regular(&self.components, self.n, q)
    }

    pub fn reparametrize(&self, psi: &Reparametrization) -> Result<RawGerm, GermError> {
        let components = psi.apply_components(&self.components)?;
        RawGerm::new(self.n, self.trunc, components)
    }
}

/// Canonical germ: components indexed by the multi-indices of weight
/// `1..=q` in canonical order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Germ {
    n: usize,
    q: u32,
    trunc: u32,
    components: Vec<MJet>,
}

impl Germ {
    pub fn new(n: usize, q: u32, trunc: u32, components: Vec<MJet>) -> Result<Self, GermError> {
        if trunc < q + 3 {
            return Err(GermError::TruncationTooSmall { trunc, min: q + 3 });
        }
        let expected = ambient_dim(n, q);
        if components.len() != expected {
            return Err(GermError::ComponentCount { expected, found: components.len() });
        }
        validate_components(n, trunc, &components)?;
        Ok(Germ { n, q, trunc, components })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn ambient_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[MJet] {
        &self.components
    }

    /// The canonical coordinate layout of this germ.
    pub fn indices(&self) -> Vec<MultiIndex> {
        canonical_indices(self.n, self.q)
    }

    pub fn component(&self, alpha: &MultiIndex) -> Result<&MJet, GermError> {
        let idx = canonical_index(alpha, self.n, self.q)
            .map_err(|_| GermError::InvalidIndex(alpha.clone()))?;
        Ok(&self.components[idx])
    }

    /// Residual `x_alpha - s^alpha`.
    pub fn residual(&self, alpha: &MultiIndex) -> Result<MJet, GermError> {
        let c = self.component(alpha)?;
        let monomial = MJet::monomial(self.n, self.trunc, alpha.clone(), Rat::one());
        Ok(c.sub(&monomial)?)
    }

    pub fn to_raw(&self) -> RawGerm {
        RawGerm { n: self.n, trunc: self.trunc, components: self.components.clone() }
    }

    pub fn osculating_dimension(&self, k: u32) -> usize {
        osculating_dimension(&self.components, self.n, k)
    }

    pub fn is_q_regular(&self, q: u32) -> bool {
        is_q_regular(&self.components, self.n, q)
    }

    /// Componentwise composition with an origin-preserving parameter change.
    pub fn reparametrize(&self, psi: &Reparametrization) -> Result<Germ, GermError> {
        let components = psi.apply_components(&self.components)?;
        Germ::new(self.n, self.q, self.trunc, components)
    }

    /// Restrict to the line `s = sigma t`.
    pub fn line_curve(&self, sigma: &[Rat]) -> Result<CurveJet, GermError> {
        line_curve(&self.components, self.n, self.trunc, sigma)
    }
}

/// Apply a homography to a germ, componentwise in the chart.
pub fn apply_homography(h: &Homography, g: &Germ) -> Result<Germ, GermError> {
    let components = h.apply_components(g.components())?;
    Germ::new(g.n(), g.q(), g.trunc(), components)
}

/// Apply a homography to a raw parametrization with matching component count.
pub fn apply_homography_raw(h: &Homography, g: &RawGerm) -> Result<RawGerm, GermError> {
    let components = h.apply_components(g.components())?;
    RawGerm::new(g.n(), g.trunc(), components)
}

/// Jet of a parametrized curve through the origin.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CurveJet {
    trunc: u32,
    components: Vec<UJet>,
}

impl CurveJet {
    pub fn new(trunc: u32, components: Vec<UJet>) -> Result<Self, GermError> {
        for (i, c) in components.iter().enumerate() {
            if c.trunc() != trunc {
                return Err(GermError::InconsistentComponents);
            }
            if !c.vanishes_at_origin() {
                return Err(GermError::NonVanishingComponent(i));
            }
        }
        Ok(CurveJet { trunc, components })
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn components(&self) -> &[UJet] {
        &self.components
    }

    /// Rank of the span of the Taylor coefficient vectors of orders
    /// `1..=mu_max`.
    pub fn span_rank(&self, mu_max: u32) -> usize {
        assert!(mu_max <= self.trunc, "order exceeds the curve truncation");
        let rows: Vec<Vec<Rat>> = (1..=mu_max)
            .map(|mu| self.components.iter().map(|c| c.coefficient(mu)).collect())
            .collect();
        exact_rank(&rows)
    }
}

fn line_curve(
    components: &[MJet],
    n: usize,
    trunc: u32,
    sigma: &[Rat],
) -> Result<CurveJet, GermError> {
    if sigma.len() != n {
        return Err(GermError::ParameterCount { expected: n, found: sigma.len() });
    }
    if sigma.iter().all(Rat::is_zero) {
        return Err(GermError::ZeroDirection);
    }
    let jets = components
        .iter()
        .map(|c| c.substitute_line(sigma))
        .collect::<Result<Vec<_>, _>>()?;
    CurveJet::new(trunc, jets)
}

/// Rank of the matrix whose rows are indexed by the monomials `s^beta`,
/// `1 <= |beta| <= k`, with entries the coefficient of `s^beta` in each
/// component.
pub fn osculating_dimension(components: &[MJet], n: usize, k: u32) -> usize {
    assert!(k >= 1, "osculating order must be positive");
    if let Some(first) = components.first() {
        assert!(k <= first.trunc(), "osculating order exceeds the truncation");
    }
    let rows: Vec<Vec<Rat>> = monomials_up_to(n, k)
        .iter()
        .map(|beta| components.iter().map(|c| c.coefficient(beta)).collect())
        .collect();
    exact_rank(&rows)
}

/// Whether the order-`q` osculating space has the maximal dimension
/// `C(n+q, q) - 1`.
pub fn is_q_regular(components: &[MJet], n: usize, q: u32) -> bool {
    osculating_dimension(components, n, q) == ambient_dim(n, q)
}

/// The standard weight-graded monomial germ: `x_alpha = s^alpha` for every
/// multi-index of weight `1..=q`.
pub fn veronese(n: usize, q: u32, trunc: u32) -> Result<Germ, GermError> {
    if n < 1 || q < 1 {
        return Err(GermError::DegenerateShape);
    }
    let components = canonical_indices(n, q)
        .into_iter()
        .map(|alpha| MJet::monomial(n, trunc, alpha, Rat::one()))
        .collect();
    Germ::new(n, q, trunc, components)
}

/// Remove the coordinate `alpha`, modelling a projection from a coordinate
/// point of the ambient space.
pub fn project_drop(g: &Germ, alpha: &MultiIndex) -> Result<RawGerm, GermError> {
    let idx = canonical_index(alpha, g.n(), g.q())
        .map_err(|_| GermError::InvalidIndex(alpha.clone()))?;
    let components: Vec<MJet> = g
        .components()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != idx)
        .map(|(_, c)| c.clone())
        .collect();
    RawGerm::new(g.n(), g.trunc(), components)
}

/// Build the germ `x_alpha = s^alpha (1 + R_{|alpha|})` from residual
/// factors keyed by weight. The weight-1 factor is forced to zero, and each
/// `R_k` must start in degree at least `q + 3 - k` so that every residual is
/// deep enough.
pub fn make_family_germ(
    n: usize,
    q: u32,
    trunc: u32,
    residual_factors: &BTreeMap<u32, MJet>,
) -> Result<Germ, GermError> {
    for (&k, factor) in residual_factors {
        if k < 2 || k > q {
            return Err(GermError::InvalidWeight(k));
        }
        let min = q + 3 - k;
        if let Some(low) = factor.lowest_degree() {
            if low < min {
                return Err(GermError::ResidualDegreeTooLow { weight: k, min });
            }
        }
    }
    let components = canonical_indices(n, q)
        .into_iter()
        .map(|alpha| {
            let monomial = MJet::monomial(n, trunc, alpha.clone(), Rat::one());
            match residual_factors.get(&alpha.weight()) {
                None => Ok(monomial),
                Some(factor) => {
                    let unit = MJet::one(n, trunc).add(&factor.with_trunc(trunc))?;
                    monomial.mul(&unit)
                }
            }
        })
        .collect::<Result<Vec<_>, AlgebraError>>()?;
    Germ::new(n, q, trunc, components)
}

/// Recover the residual factors of a weight-graded family germ, if the germ
/// has that shape: weight-1 components exactly `s^alpha`, and for each
/// weight `k` a single factor `R_k` with `x_alpha = s^alpha (1 + R_k)` for
/// every component of weight `k`. Returns `None` when the pattern fails.
pub fn check_family_pattern(g: &Germ) -> Option<BTreeMap<u32, MJet>> {
    let n = g.n();
    let trunc = g.trunc();
    // weight-1 components must be exactly the parameters
    for i in 0..n {
        let alpha = MultiIndex::unit(n, i);
        if !g.residual(&alpha).ok()?.is_zero() {
            return None;
        }
    }
    let mut factors = BTreeMap::new();
    for k in 2..=g.q() {
        let principal = MultiIndex::pivot(n, k);
        let res = g.residual(&principal).ok()?;
        // candidate factor: residual of the principal component divided by s1^k
        let mut candidate = MJet::zero(n, trunc);
        for (alpha, coeff) in res.terms() {
            let reduced = alpha.checked_sub(&principal)?;
            candidate = candidate
                .add(&MJet::monomial(n, trunc, reduced, coeff.clone()))
                .ok()?;
        }
        if !candidate.vanishes_at_origin() {
            return None;
        }
        // every component of this weight must carry the same factor
        for alpha in crate::algebra::monomials_of_weight(n, k) {
            let expected = MJet::monomial(n, trunc, alpha.clone(), Rat::one())
                .mul(&candidate)
                .ok()?;
            if g.residual(&alpha).ok()? != expected {
                return None;
            }
        }
        if !candidate.is_zero() {
            factors.insert(k, candidate);
        }
    }
    Some(factors)
}

/// Origin-preserving parameter change with invertible linear part.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Reparametrization {
    maps: Vec<MJet>,
}

impl Reparametrization {
    pub fn new(maps: Vec<MJet>) -> Result<Self, GermError> {
        let n = maps.len();
        for m in &maps {
            if m.n() != n {
                return Err(GermError::ParameterCount { expected: n, found: m.n() });
            }
            if !m.vanishes_at_origin() {
                return Err(GermError::OriginNotFixed);
            }
        }
        let psi = Reparametrization { maps };
        if psi.linear_part().inverse().is_none() {
            return Err(GermError::SingularLinearPart);
        }
        Ok(psi)
    }

    pub fn identity(n: usize, trunc: u32) -> Self {
        Reparametrization {
            maps: (0..n).map(|i| MJet::variable(n, trunc, i)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.maps.len()
    }

    pub fn trunc(&self) -> u32 {
        self.maps.first().map_or(0, MJet::trunc)
    }

    pub fn maps(&self) -> &[MJet] {
        &self.maps
    }

    pub fn is_identity(&self) -> bool {
        self.maps
            .iter()
            .enumerate()
            .all(|(i, m)| *m == MJet::variable(self.n(), m.trunc(), i))
    }

    /// Matrix of the degree-1 part.
    pub fn linear_part(&self) -> Mat {
        let n = self.n();
        Mat::from_rows(
            self.maps
                .iter()
                .map(|m| {
                    (0..n)
                        .map(|j| m.coefficient(&MultiIndex::unit(n, j)))
                        .collect()
                })
                .collect(),
        )
    }

    fn apply_components(&self, components: &[MJet]) -> Result<Vec<MJet>, GermError> {
        Ok(crate::algebra::compose_many(components, &self.maps)?)
    }

    /// Substitute into a single jet.
    pub fn apply(&self, jet: &MJet) -> Result<MJet, GermError> {
        Ok(jet.compose(&self.maps)?)
    }

    /// Composition `self` after `other` as substitutions: the result sends
    /// `s` to `self(other(s))`.
    pub fn compose(&self, other: &Reparametrization) -> Result<Reparametrization, GermError> {
        let maps = self
            .maps
            .iter()
            .map(|m| m.compose(&other.maps))
            .collect::<Result<Vec<_>, _>>()?;
        Reparametrization::new(maps)
    }

    /// Compositional inverse, solved degree by degree.
    pub fn inverse(&self) -> Result<Reparametrization, GermError> {
        Ok(Reparametrization { maps: invert_map(&self.maps)? })
    }
}

/// Compositional inverse of an origin-preserving map of `n` jets with
/// invertible linear part: returns `psi` with `maps(psi(s)) = s` up to the
/// truncation.
pub fn invert_map(maps: &[MJet]) -> Result<Vec<MJet>, GermError> {
    let n = maps.len();
    debug_assert!(n > 0);
    let trunc = maps[0].trunc();
    for m in maps {
        if !m.vanishes_at_origin() {
            return Err(GermError::OriginNotFixed);
        }
    }
    let linear = Mat::from_rows(
        maps.iter()
            .map(|m| (0..n).map(|j| m.coefficient(&MultiIndex::unit(n, j))).collect())
            .collect(),
    );
    let linear_inv = linear.inverse().ok_or(GermError::SingularLinearPart)?;
    // start from the inverse of the linear part
    let mut psi: Vec<MJet> = (0..n)
        .map(|i| {
            let mut acc = MJet::zero(n, trunc);
            for j in 0..n {
                let c = linear_inv.get(i, j);
                if !c.is_zero() {
                    acc = acc.add(&MJet::variable(n, trunc, j).scale(c))?;
                }
            }
            Ok::<_, AlgebraError>(acc)
        })
        .collect::<Result<Vec<_>, _>>()?;
    // the maps deviate from their linear part only from this degree on
    let first_correction = maps
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            let mut linear = MJet::zero(n, trunc);
            for j in 0..n {
                let c = m.coefficient(&MultiIndex::unit(n, j));
                if !c.is_zero() {
                    linear = linear.add(&MJet::variable(n, trunc, j).scale(&c)).ok()?;
                }
            }
            m.sub(&linear).ok().and_then(|r| r.lowest_degree()).map(|d| (i, d))
        })
        .map(|(_, d)| d)
        .min();
    let Some(start) = first_correction else {
        return Ok(psi); // purely linear map
    };
    // kill the error term one degree at a time
    for degree in start..=trunc {
        let composed_all = crate::algebra::compose_many(maps, &psi)?;
        let mut error: Vec<MJet> = Vec::with_capacity(n);
        for (i, composed) in composed_all.into_iter().enumerate() {
            let residual = composed.sub(&MJet::variable(n, trunc, i))?;
            error.push(residual.homogeneous_part(degree)?.to_mjet(trunc));
        }
        if error.iter().all(MJet::is_zero) {
            continue;
        }
        for i in 0..n {
            let mut correction = MJet::zero(n, trunc);
            for j in 0..n {
                let c = linear_inv.get(i, j);
                if !c.is_zero() {
                    correction = correction.add(&error[j].scale(c))?;
                }
            }
            psi[i] = psi[i].sub(&correction)?;
        }
    }
    Ok(psi)
}

/// Deterministic random parameter change: invertible linear part plus sparse
/// higher-degree terms up to degree 3, all with coefficients bounded by
/// `magnitude`.
pub fn random_reparametrization(
    n: usize,
    trunc: u32,
    rng: &mut impl Rng,
    magnitude: u32,
) -> Reparametrization {
    if magnitude == 0 {
        return Reparametrization::identity(n, trunc);
    }
    loop {
        let maps: Vec<MJet> = (0..n)
            .map(|i| {
                let mut m = MJet::variable(n, trunc, i);
                for j in 0..n {
                    if j != i {
                        let c = random_rat(rng, magnitude);
                        if !c.is_zero() {
                            m = m.add(&MJet::variable(n, trunc, j).scale(&c)).unwrap();
                        }
                    }
                }
                for beta in monomials_up_to(n, 3.min(trunc)) {
                    if beta.weight() < 2 || rng.gen_range(0..3) != 0 {
                        continue;
                    }
                    let c = random_rat(rng, magnitude);
                    if !c.is_zero() {
                        m = m.add(&MJet::monomial(n, trunc, beta, c)).unwrap();
                    }
                }
                m
            })
            .collect();
        if let Ok(psi) = Reparametrization::new(maps) {
            return psi;
        }
    }
}

/// Disguise a germ by a random homography and a random parameter change,
/// returning the transformed germ together with both witnesses.
/// Deterministic in the seed; magnitude zero returns the germ unchanged with
/// identity witnesses.
pub fn disguise(
    g: &Germ,
    seed: u64,
    magnitude: u32,
) -> Result<(Germ, Homography, Reparametrization), GermError> {
    let dim = g.ambient_dim();
    if magnitude == 0 {
        return Ok((
            g.clone(),
            Homography::identity(dim),
            Reparametrization::identity(g.n(), g.trunc()),
        ));
    }
    let h = crate::projective::random_homography(g.n(), g.q(), seed, magnitude);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e3779b97f4a7c15));
    let psi = random_reparametrization(g.n(), g.trunc(), &mut rng, magnitude);
    let out = apply_homography(&h, &g.reparametrize(&psi)?)?;
    Ok((out, h, psi))
}

#[cfg(test)]
mod tests {
    use crate::algebra::rat;

    use super::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn veronese_components() {
        let v = veronese(2, 2, 7).unwrap();
        assert_eq!(v.ambient_dim(), 5);
        let expected: Vec<MJet> = [
            mi(&[1, 0]),
            mi(&[0, 1]),
            mi(&[2, 0]),
            mi(&[1, 1]),
            mi(&[0, 2]),
        ]
        .into_iter()
        .map(|a| MJet::monomial(2, 7, a, rat(1)))
        .collect();
        assert_eq!(v.components(), &expected[..]);

        // n = 1 gives the moment curve
        let m = veronese(1, 3, 8).unwrap();
        for (k, c) in m.components().iter().enumerate() {
            assert_eq!(*c, MJet::monomial(1, 8, mi(&[k as u32 + 1]), rat(1)));
        }

        assert!(matches!(
            veronese(2, 2, 4),
            Err(GermError::TruncationTooSmall { trunc: 4, min: 5 })
        ));
    }

    #[test]
    fn osculating_dimensions() {
        let v = veronese(2, 2, 7).unwrap();
        assert_eq!(v.osculating_dimension(1), 2);
        assert_eq!(v.osculating_dimension(2), 5);

        let v32 = veronese(3, 2, 8).unwrap();
        assert_eq!(v32.osculating_dimension(2), 9);

        let v23 = veronese(2, 3, 9).unwrap();
        assert_eq!(v23.osculating_dimension(1), 2);
        assert_eq!(v23.osculating_dimension(2), 5);
        assert_eq!(v23.osculating_dimension(3), 9);
        assert!(v23.is_q_regular(2), "order-2 regularity of the cubic germ");
    }

    #[test]
    fn projection_drops_regularity() {
        let v = veronese(2, 2, 7).unwrap();
        let dropped = project_drop(&v, &mi(&[1, 1])).unwrap();
        assert_eq!(dropped.components().len(), 4);
        assert_eq!(dropped.osculating_dimension(2), 4);
        assert!(!dropped.is_q_regular(2));
        assert!(v.is_q_regular(2));

        let dropped = project_drop(&v, &mi(&[2, 0])).unwrap();
        let kept: Vec<MJet> = [mi(&[1, 0]), mi(&[0, 1]), mi(&[1, 1]), mi(&[0, 2])]
            .into_iter()
            .map(|a| MJet::monomial(2, 7, a, rat(1)))
            .collect();
        assert_eq!(dropped.components(), &kept[..]);

        assert!(matches!(
            project_drop(&v, &mi(&[3, 0])),
            Err(GermError::InvalidIndex(_))
        ));
    }

    #[test]
    fn reparametrize_examples() {
        let v = veronese(2, 2, 7).unwrap();
        let id = Reparametrization::identity(2, 7);
        assert_eq!(v.reparametrize(&id).unwrap(), v);

        // swapping the parameters swaps coordinates of the embedding
        let swap = Reparametrization::new(vec![
            MJet::variable(2, 7, 1),
            MJet::variable(2, 7, 0),
        ])
        .unwrap();
        let swapped = v.reparametrize(&swap).unwrap();
        assert_eq!(
            swapped.component(&mi(&[1, 0])).unwrap(),
            &MJet::variable(2, 7, 1)
        );
        assert_eq!(
            swapped.component(&mi(&[2, 0])).unwrap(),
            &MJet::monomial(2, 7, mi(&[0, 2]), rat(1))
        );

        // psi = (s1 + s1^2, s2): x_(2,0) -> s1^2 + 2 s1^3 + s1^4
        let psi = Reparametrization::new(vec![
            MJet::variable(2, 7, 0)
                .add(&MJet::monomial(2, 7, mi(&[2, 0]), rat(1)))
                .unwrap(),
            MJet::variable(2, 7, 1),
        ])
        .unwrap();
        let moved = v.reparametrize(&psi).unwrap();
        let expected = MJet::from_terms(
            2,
            7,
            [
                (mi(&[2, 0]), rat(1)),
                (mi(&[3, 0]), rat(2)),
                (mi(&[4, 0]), rat(1)),
            ],
        )
        .unwrap();
        assert_eq!(moved.component(&mi(&[2, 0])).unwrap(), &expected);
    }

    #[test]
    fn line_curves() {
        let v = veronese(2, 2, 7).unwrap();
        let c = v.line_curve(&[rat(1), rat(2)]).unwrap();
        let coeffs: Vec<(u32, Rat)> = vec![
            (1, rat(1)),
            (1, rat(2)),
            (2, rat(1)),
            (2, rat(2)),
            (2, rat(4)),
        ];
        for (component, (order, value)) in c.components().iter().zip(coeffs) {
            assert_eq!(component.coefficient(order), value);
        }
        assert_eq!(c.span_rank(7), 2);

        let c = v.line_curve(&[rat(1), rat(0)]).unwrap();
        assert!(c.components()[1].is_zero());
        assert!(c.components()[3].is_zero());
        assert!(c.components()[4].is_zero());

        assert!(matches!(
            v.line_curve(&[rat(0), rat(0)]),
            Err(GermError::ZeroDirection)
        ));

        // moment curve spans the full ambient
        let m = veronese(1, 3, 8).unwrap();
        let c = m.line_curve(&[rat(1)]).unwrap();
        assert_eq!(c.span_rank(3), 3);
    }

    #[test]
    fn family_germ_construction() {
        // all factors zero gives the standard germ
        let g = make_family_germ(2, 2, 7, &BTreeMap::new()).unwrap();
        assert_eq!(g, veronese(2, 2, 7).unwrap());

        // R_2 = s1^5 at (n,q,T) = (2,2,7)
        let r2 = MJet::monomial(2, 7, mi(&[5, 0]), rat(1));
        let factors = BTreeMap::from([(2u32, r2.clone())]);
        let g = make_family_germ(2, 2, 7, &factors).unwrap();
        assert_eq!(
            g.component(&mi(&[2, 0])).unwrap(),
            &MJet::from_terms(2, 7, [(mi(&[2, 0]), rat(1)), (mi(&[7, 0]), rat(1))]).unwrap()
        );
        assert_eq!(
            g.component(&mi(&[1, 1])).unwrap(),
            &MJet::from_terms(2, 7, [(mi(&[1, 1]), rat(1)), (mi(&[6, 1]), rat(1))]).unwrap()
        );
        assert_eq!(
            g.component(&mi(&[0, 2])).unwrap(),
            &MJet::from_terms(2, 7, [(mi(&[0, 2]), rat(1)), (mi(&[5, 2]), rat(1))]).unwrap()
        );

        // a factor below degree q+3-k is rejected; degree exactly q+3-k is
        // the shallowest admissible choice
        let shallow = BTreeMap::from([(2u32, MJet::monomial(2, 7, mi(&[2, 0]), rat(1)))]);
        assert!(matches!(
            make_family_germ(2, 2, 7, &shallow),
            Err(GermError::ResidualDegreeTooLow { weight: 2, min: 3 })
        ));
        let boundary = BTreeMap::from([(2u32, MJet::monomial(2, 7, mi(&[3, 0]), rat(1)))]);
        let g3 = make_family_germ(2, 2, 7, &boundary).unwrap();
        assert_eq!(
            g3.component(&mi(&[2, 0])).unwrap(),
            &MJet::from_terms(2, 7, [(mi(&[2, 0]), rat(1)), (mi(&[5, 0]), rat(1))]).unwrap()
        );
        assert!(matches!(
            make_family_germ(2, 2, 7, &BTreeMap::from([(1u32, MJet::zero(2, 7))])),
            Err(GermError::InvalidWeight(1))
        ));

        // family line curve at sigma=(1,1): second weight layer is t^2 + t^7
        let c = g.line_curve(&[rat(1), rat(1)]).unwrap();
        assert_eq!(c.components()[2].coefficient(2), rat(1));
        assert_eq!(c.components()[2].coefficient(7), rat(1));
        assert_eq!(c.span_rank(7), 2);
    }

    #[test]
    fn family_pattern_recovery() {
        let v = veronese(2, 2, 7).unwrap();
        assert_eq!(check_family_pattern(&v), Some(BTreeMap::new()));

        let r2 = MJet::monomial(2, 7, mi(&[5, 0]), rat(1));
        let factors = BTreeMap::from([(2u32, r2)]);
        let g = make_family_germ(2, 2, 7, &factors).unwrap();
        assert_eq!(check_family_pattern(&g), Some(factors));

        // s2^7 added to a single component breaks the shared-factor pattern
        let mut components = v.components().to_vec();
        components[2] = components[2]
            .add(&MJet::monomial(2, 7, mi(&[0, 7]), rat(1)))
            .unwrap();
        let broken = Germ::new(2, 2, 7, components).unwrap();
        assert_eq!(check_family_pattern(&broken), None);
    }

    #[test]
    fn map_inversion() {
        let n = 2;
        let trunc = 7;
        let maps = vec![
            MJet::variable(n, trunc, 0)
                .add(&MJet::monomial(n, trunc, mi(&[0, 2]), rat(3)))
                .unwrap(),
            MJet::variable(n, trunc, 1)
                .sub(&MJet::monomial(n, trunc, mi(&[1, 1]), rat(1)))
                .unwrap(),
        ];
        let inv = invert_map(&maps).unwrap();
        for (i, m) in maps.iter().enumerate() {
            assert_eq!(m.compose(&inv).unwrap(), MJet::variable(n, trunc, i));
        }
        // the inverse is two-sided
        for (i, m) in inv.iter().enumerate() {
            assert_eq!(m.compose(&maps).unwrap(), MJet::variable(n, trunc, i));
        }
    }

    #[test]
    fn disguise_round_trip() {
        let v = veronese(2, 2, 7).unwrap();
        let (same, h, psi) = disguise(&v, 3, 0).unwrap();
        assert_eq!(same, v);
        assert!(h.is_identity());
        assert!(psi.is_identity());

        let (out, h, psi) = disguise(&v, 1, 3).unwrap();
        assert!(out.is_q_regular(2), "regularity is invariant under disguise");
        // undo: apply the inverse homography, then the inverse parameter change
        let undone = apply_homography(&h.inverse(), &out).unwrap();
        let recovered = undone.reparametrize(&psi.inverse().unwrap()).unwrap();
        assert_eq!(recovered, v);

        // determinism
        let (out2, _, _) = disguise(&v, 1, 3).unwrap();
        assert_eq!(out, out2);
    }
}
