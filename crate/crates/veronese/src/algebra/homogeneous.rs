use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::mjet::write_term;
use super::{AlgebraError, MJet, MultiIndex, Rat};

/// Homogeneous polynomial: every exponent has total weight exactly `degree`.
#[derive(Clone, PartialEq, Eq)]
pub struct HomogeneousPoly {
    n: usize,
    degree: u32,
    terms: BTreeMap<MultiIndex, Rat>,
}

impl HomogeneousPoly {
    pub fn zero(n: usize, degree: u32) -> Self {
        HomogeneousPoly { n, degree, terms: BTreeMap::new() }
    }

    pub fn monomial(n: usize, alpha: MultiIndex, coeff: Rat) -> Self {
        let degree = alpha.weight();
        let mut p = Self::zero(n, degree);
        p.insert(alpha, coeff);
        p
    }

    pub fn from_terms(
        n: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (MultiIndex, Rat)>,
    ) -> Result<Self, AlgebraError> {
        let mut p = Self::zero(n, degree);
        for (alpha, coeff) in terms {
            if alpha.len() != n {
                return Err(AlgebraError::ArityMismatch(alpha.len(), n));
            }
            if alpha.weight() != degree {
                return Err(AlgebraError::WeightDegreeMismatch(alpha.weight(), degree));
            }
            p.insert(alpha, coeff);
        }
        Ok(p)
    }

    fn insert(&mut self, alpha: MultiIndex, coeff: Rat) {
        if coeff.is_zero() {
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

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Rat {
        self.terms.get(alpha).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, other: &HomogeneousPoly) -> Result<HomogeneousPoly, AlgebraError> {
        if self.degree != other.degree {
            return Err(AlgebraError::DegreeMismatch(self.degree, other.degree));
        }
        if self.n != other.n {
            return Err(AlgebraError::VariableMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.insert(a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &HomogeneousPoly) -> Result<HomogeneousPoly, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> HomogeneousPoly {
        HomogeneousPoly {
            n: self.n,
            degree: self.degree,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, factor: &Rat) -> HomogeneousPoly {
        if factor.is_zero() {
            return HomogeneousPoly::zero(self.n, self.degree);
        }
        HomogeneousPoly {
            n: self.n,
            degree: self.degree,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c * factor)).collect(),
        }
    }

    /// Multiply by the monomial `s^beta` (degree rises by `|beta|`).
    pub fn mul_monomial(&self, beta: &MultiIndex) -> HomogeneousPoly {
        HomogeneousPoly {
            n: self.n,
            degree: self.degree + beta.weight(),
            terms: self.terms.iter().map(|(a, c)| (a.add(beta), c.clone())).collect(),
        }
    }

    /// Multiply by the single variable `s_{i+1}`.
    pub fn mul_var(&self, i: usize) -> HomogeneousPoly {
        self.mul_monomial(&MultiIndex::unit(self.n, i))
    }

    /// Full product; used by identity checks and test oracles.
    pub fn mul(&self, other: &HomogeneousPoly) -> HomogeneousPoly {
        let mut out = HomogeneousPoly::zero(self.n, self.degree + other.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.insert(a.add(b), ca * cb);
            }
        }
        out
    }

    /// Largest exponent of `s1` among the terms; `None` for zero.
    pub fn s1_degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.entries()[0]).max()
    }

    /// Split into the part with `s1`-exponent at least `min` and the rest.
    pub fn s1_split(&self, min: u32) -> (HomogeneousPoly, HomogeneousPoly) {
        let mut hi = HomogeneousPoly::zero(self.n, self.degree);
        let mut lo = HomogeneousPoly::zero(self.n, self.degree);
        for (a, c) in &self.terms {
            if a.entries()[0] >= min {
                hi.insert(a.clone(), c.clone());
            } else {
                lo.insert(a.clone(), c.clone());
            }
        }
        (hi, lo)
    }

    /// Exact division by `s1^k` when possible; `None` signals a divisibility
    /// failure (the zero polynomial divides trivially).
    pub fn s1_divide(&self, k: u32) -> Option<HomogeneousPoly> {
        if self.is_zero() {
            return Some(HomogeneousPoly::zero(self.n, self.degree.saturating_sub(k)));
        }
        if self.degree < k {
            return None;
        }
        let mut out = HomogeneousPoly::zero(self.n, self.degree - k);
        for (a, c) in &self.terms {
            if a.entries()[0] < k {
                return None;
            }
            let mut e = a.entries().to_vec();
            e[0] -= k;
            out.insert(MultiIndex::new(e), c.clone());
        }
        Some(out)
    }

    /// First term whose `s1`-exponent is below `k`, if any. This is the
    /// concrete witness that `s1^k` does not divide the polynomial.
    pub fn s1_obstruction(&self, k: u32) -> Option<(MultiIndex, Rat)> {
        self.terms
            .iter()
            .find(|(a, _)| a.entries()[0] < k)
            .map(|(a, c)| (a.clone(), c.clone()))
    }

    pub fn to_mjet(&self, trunc: u32) -> MJet {
        MJet::from_terms(self.n, trunc, self.terms.iter().map(|(a, c)| (a.clone(), c.clone())))
            .expect("homogeneous terms are well-formed")
    }

    /// Leading term in canonical order, if any.
    pub fn leading_term(&self) -> Option<(MultiIndex, Rat)> {
        self.terms.iter().next().map(|(a, c)| (a.clone(), c.clone()))
    }
}

impl fmt::Debug for HomogeneousPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Homogeneous[n={}, d={}]({})", self.n, self.degree, self)
    }
}

impl fmt::Display for HomogeneousPoly {
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
