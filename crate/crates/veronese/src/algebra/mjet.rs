use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::{AlgebraError, HomogeneousPoly, MultiIndex, Rat, UJet};

/// Truncated multivariate power series over the exact rationals.
///
/// A jet keeps every term of total degree at most `trunc`; arithmetic
/// silently discards anything deeper. Term maps are canonical: no stored
/// coefficient is zero, so structural equality is semantic equality.
#[derive(Clone, PartialEq, Eq)]
pub struct MJet {
    n: usize,
    trunc: u32,
    terms: BTreeMap<MultiIndex, Rat>,
}

impl MJet {
    /// The zero jet.
    pub fn zero(n: usize, trunc: u32) -> Self {
        MJet { n, trunc, terms: BTreeMap::new() }
    }

    pub fn one(n: usize, trunc: u32) -> Self {
        Self::constant(n, trunc, Rat::one())
    }

    pub fn constant(n: usize, trunc: u32, value: Rat) -> Self {
        let mut jet = Self::zero(n, trunc);
        jet.insert(MultiIndex::zero(n), value);
        jet
    }

    /// The bare variable `s_{i+1}`.
    pub fn variable(n: usize, trunc: u32, i: usize) -> Self {
        Self::monomial(n, trunc, MultiIndex::unit(n, i), Rat::one())
    }

    /// A single term `coeff * s^alpha` (dropped if beyond the truncation).
    pub fn monomial(n: usize, trunc: u32, alpha: MultiIndex, coeff: Rat) -> Self {
        debug_assert_eq!(alpha.len(), n);
        let mut jet = Self::zero(n, trunc);
        jet.insert(alpha, coeff);
        jet
    }

    /// Build a jet from explicit terms, rejecting malformed exponents.
    pub fn from_terms(
        n: usize,
        trunc: u32,
        terms: impl IntoIterator<Item = (MultiIndex, Rat)>,
    ) -> Result<Self, AlgebraError> {
        let mut jet = Self::zero(n, trunc);
        for (alpha, coeff) in terms {
            if alpha.len() != n {
                return Err(AlgebraError::ArityMismatch(alpha.len(), n));
            }
            if alpha.weight() > trunc {
                return Err(AlgebraError::DegreeOutOfRange(alpha.weight(), trunc));
            }
            jet.insert(alpha, coeff);
        }
        Ok(jet)
    }

    fn insert(&mut self, alpha: MultiIndex, coeff: Rat) {
        if alpha.weight() > self.trunc || coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(alpha);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Rat {
        self.terms.get(alpha).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coefficient(&MultiIndex::zero(self.n))
    }

    pub fn vanishes_at_origin(&self) -> bool {
        self.constant_term().is_zero()
    }

    /// Smallest total degree carrying a term, if any.
    pub fn lowest_degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.weight()).min()
    }

    fn check_compatible(&self, other: &MJet) -> Result<(), AlgebraError> {
        if self.n != other.n {
            return Err(AlgebraError::VariableMismatch(self.n, other.n));
        }
        if self.trunc != other.trunc {
            return Err(AlgebraError::TruncationMismatch(self.trunc, other.trunc));
        }
        Ok(())
    }

    pub fn add(&self, other: &MJet) -> Result<MJet, AlgebraError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (alpha, coeff) in &other.terms {
            out.insert(alpha.clone(), coeff.clone());
        }
        Ok(out)
    }

    /// In-place `self += factor * other`; the workhorse behind linear
    /// combinations of whole germs.
    pub fn add_assign_scaled(&mut self, other: &MJet, factor: &Rat) -> Result<(), AlgebraError> {
        self.check_compatible(other)?;
        if factor.is_zero() {
            return Ok(());
        }
        for (alpha, coeff) in &other.terms {
            self.insert(alpha.clone(), coeff * factor);
        }
        Ok(())
    }

    pub fn sub(&self, other: &MJet) -> Result<MJet, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MJet {
        MJet {
            n: self.n,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, factor: &Rat) -> MJet {
        if factor.is_zero() {
            return MJet::zero(self.n, self.trunc);
        }
        MJet {
            n: self.n,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c * factor)).collect(),
        }
    }

    /// Truncated product. Bilinear and commutative; degrees past the
    /// truncation are discarded.
    pub fn mul(&self, other: &MJet) -> Result<MJet, AlgebraError> {
        self.check_compatible(other)?;
        let mut out = MJet::zero(self.n, self.trunc);
        for (a, ca) in &self.terms {
            let wa = a.weight();
            for (b, cb) in &other.terms {
                if wa + b.weight() > self.trunc {
                    continue;
                }
                out.insert(a.add(b), ca * cb);
            }
        }
        Ok(out)
    }

    /// Multiplicative inverse of a unit jet, via the geometric series.
    pub fn inverse(&self) -> Result<MJet, AlgebraError> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(AlgebraError::NotAUnit);
        }
        // self = c (1 + u) with u vanishing at 0
        let u = self.scale(&c.recip()).sub(&MJet::one(self.n, self.trunc))?;
        let mut inv = MJet::one(self.n, self.trunc);
        let mut power = MJet::one(self.n, self.trunc);
        for k in 1..=self.trunc {
            power = power.mul(&u)?;
            if power.is_zero() {
                break;
            }
            inv = if k % 2 == 1 { inv.sub(&power)? } else { inv.add(&power)? };
        }
        Ok(inv.scale(&c.recip()))
    }

    /// Substitute `s_i := maps[i]`, each map vanishing at the origin.
    pub fn compose(&self, maps: &[MJet]) -> Result<MJet, AlgebraError> {
        let composed = compose_many(std::slice::from_ref(self), maps)?;
        Ok(composed.into_iter().next().expect("one input, one output"))
    }

    /// Restrict to the line `s = sigma t`, producing a univariate jet of the
    /// same order.
    pub fn substitute_line(&self, sigma: &[Rat]) -> Result<UJet, AlgebraError> {
        if sigma.len() != self.n {
            return Err(AlgebraError::ArityMismatch(sigma.len(), self.n));
        }
        let mut coeffs = vec![Rat::zero(); self.trunc as usize + 1];
        for (alpha, coeff) in &self.terms {
            let mut value = coeff.clone();
            for (i, &e) in alpha.entries().iter().enumerate() {
                for _ in 0..e {
                    value *= &sigma[i];
                }
            }
            coeffs[alpha.weight() as usize] += value;
        }
        UJet::from_coeffs(self.trunc, coeffs)
    }

    /// Terms of total degree exactly `d`, as a homogeneous polynomial.
    pub fn homogeneous_part(&self, d: u32) -> Result<HomogeneousPoly, AlgebraError> {
        if d > self.trunc {
            return Err(AlgebraError::DegreeOutOfRange(d, self.trunc));
        }
        let terms = self
            .terms
            .iter()
            .filter(|(a, _)| a.weight() == d)
            .map(|(a, c)| (a.clone(), c.clone()));
        HomogeneousPoly::from_terms(self.n, d, terms)
    }

    /// All terms of total degree at most `d`.
    pub fn truncate_degree(&self, d: u32) -> MJet {
        MJet {
            n: self.n,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| a.weight() <= d)
                .map(|(a, c)| (a.clone(), c.clone()))
                .collect(),
        }
    }

    /// Re-truncate to a (smaller or larger) order.
    pub fn with_trunc(&self, trunc: u32) -> MJet {
        MJet {
            n: self.n,
            trunc,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| a.weight() <= trunc)
                .map(|(a, c)| (a.clone(), c.clone()))
                .collect(),
        }
    }
}

impl fmt::Debug for MJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MJet[n={}, T={}]({})", self.n, self.trunc, self)
    }
}

impl fmt::Display for MJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (alpha, coeff) in &self.terms {
            write_term(f, alpha, coeff, &mut first)?;
        }
        Ok(())
    }
}

/// Substitute `s_i := maps[i]` in every jet of `jets` at once, sharing the
/// monomial-power table across all of them. Each needed power `maps^alpha`
/// is computed exactly once from a lower one, which is what makes
/// reparametrizing a whole germ affordable.
pub fn compose_many(jets: &[MJet], maps: &[MJet]) -> Result<Vec<MJet>, AlgebraError> {
    let Some(first) = jets.first() else {
        return Ok(Vec::new());
    };
    let n = first.n;
    let trunc = first.trunc;
    if maps.len() != n {
        return Err(AlgebraError::ArityMismatch(maps.len(), n));
    }
    for jet in jets {
        if jet.n != n {
            return Err(AlgebraError::VariableMismatch(jet.n, n));
        }
        if jet.trunc != trunc {
            return Err(AlgebraError::TruncationMismatch(jet.trunc, trunc));
        }
    }
    for m in maps {
        if m.n != n {
            return Err(AlgebraError::VariableMismatch(m.n, n));
        }
        if m.trunc != trunc {
            return Err(AlgebraError::TruncationMismatch(m.trunc, trunc));
        }
        if !m.vanishes_at_origin() {
            return Err(AlgebraError::OriginNotPreserved);
        }
    }

    // exponents whose powers are needed, closed under peeling one variable
    let mut needed: std::collections::BTreeSet<MultiIndex> = std::collections::BTreeSet::new();
    let mut stack: Vec<MultiIndex> = jets
        .iter()
        .flat_map(|jet| jet.terms.keys().cloned())
        .filter(|alpha| !alpha.is_zero())
        .collect();
    while let Some(alpha) = stack.pop() {
        if !needed.insert(alpha.clone()) {
            continue;
        }
        let i = alpha
            .entries()
            .iter()
            .position(|&e| e > 0)
            .expect("nonzero exponent");
        let parent = alpha.checked_div_var(i).expect("entry is positive");
        if !parent.is_zero() {
            stack.push(parent);
        }
    }

    // powers in weight order, each from a predecessor with one fewer factor
    let mut powers: BTreeMap<MultiIndex, MJet> = BTreeMap::new();
    for alpha in &needed {
        let i = alpha
            .entries()
            .iter()
            .position(|&e| e > 0)
            .expect("nonzero exponent");
        let parent = alpha.checked_div_var(i).expect("entry is positive");
        let jet = if parent.is_zero() {
            maps[i].clone()
        } else {
            powers
                .get(&parent)
                .expect("weight order computes parents first")
                .mul(&maps[i])?
        };
        powers.insert(alpha.clone(), jet);
    }

    jets.iter()
        .map(|jet| {
            let mut out = MJet::zero(n, trunc);
            for (alpha, coeff) in &jet.terms {
                if alpha.is_zero() {
                    out.insert(alpha.clone(), coeff.clone());
                } else {
                    out.add_assign_scaled(&powers[alpha], coeff)?;
                }
            }
            Ok(out)
        })
        .collect()
}

/// Shared term printer: `s1^2*s2`, `-1/2*s1`, leading sign handling.
pub(super) fn write_term(
    f: &mut fmt::Formatter<'_>,
    alpha: &MultiIndex,
    coeff: &Rat,
    first: &mut bool,
) -> fmt::Result {
    use num_traits::Signed;
    let negative = coeff.is_negative();
    let magnitude = coeff.abs();
    if *first {
        if negative {
            write!(f, "-")?;
        }
        *first = false;
    } else if negative {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    let vars: Vec<String> = alpha
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            if e == 1 {
                format!("s{}", i + 1)
            } else {
                format!("s{}^{}", i + 1, e)
            }
        })
        .collect();
    if vars.is_empty() {
        write!(f, "{}", magnitude)
    } else if magnitude.is_one() {
        write!(f, "{}", vars.join("*"))
    } else {
        write!(f, "{}*{}", magnitude, vars.join("*"))
    }
}
