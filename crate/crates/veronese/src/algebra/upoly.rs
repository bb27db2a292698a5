use std::fmt;

use num_traits::{One, Zero};

use super::{AlgebraError, Rat, UJet};

/// Dense univariate polynomial over the rationals, trailing zeros trimmed.
/// The empty coefficient vector is the zero polynomial.
#[derive(Clone, PartialEq, Eq)]
pub struct UPoly {
    coeffs: Vec<Rat>,
}

impl UPoly {
    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    /// The monomial `t^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = Rat::one();
        UPoly { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Rat::is_zero) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coefficient(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coefficients(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn add(&self, other: &UPoly) -> UPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| self.coefficient(k) + other.coefficient(k))
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| self.coefficient(k) - other.coefficient(k))
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn scale(&self, factor: &Rat) -> UPoly {
        if factor.is_zero() {
            return UPoly::zero();
        }
        UPoly { coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn pow(&self, e: u32) -> UPoly {
        let mut out = UPoly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Substitute `t := a t` (rescale the parameter).
    pub fn substitute_scaled(&self, a: &Rat) -> UPoly {
        let mut factor = Rat::one();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = c * &factor;
                factor *= a;
                out
            })
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Euclidean division: `self = q * div + r` with `deg r < deg div`.
    pub fn divrem(&self, div: &UPoly) -> (UPoly, UPoly) {
        assert!(!div.is_zero(), "division by the zero polynomial");
        let dd = div.degree().unwrap();
        let lead = div.coeffs[dd].clone();
        let mut rem = self.clone();
        let mut quot = vec![Rat::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let factor = &rem.coeffs[rd] / &lead;
            quot[rd - dd] = factor.clone();
            let mut shifted = vec![Rat::zero(); rd - dd];
            shifted.extend(div.coeffs.iter().map(|c| c * &factor));
            rem = rem.sub(&UPoly::from_coeffs(shifted));
        }
        (UPoly::from_coeffs(quot), rem)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        match a.degree() {
            None => UPoly::zero(),
            Some(d) => {
                let lead = a.coeffs[d].clone();
                a.scale(&lead.recip())
            }
        }
    }

    /// View as a jet of the given order.
    pub fn jet(&self, trunc: u32) -> UJet {
        let coeffs = (0..=trunc as usize).map(|k| self.coefficient(k)).collect();
        UJet::from_coeffs(trunc, coeffs).expect("length matches by construction")
    }

    pub fn check_degree_bound(&self, bound: u32) -> Result<(), AlgebraError> {
        match self.degree() {
            Some(d) if d as u32 > bound => {
                Err(AlgebraError::DegreeOutOfRange(d as u32, bound))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UPoly({})", self)
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let trunc = self.coeffs.len() as u32 - 1;
        write!(f, "{}", self.jet(trunc))
    }
}
