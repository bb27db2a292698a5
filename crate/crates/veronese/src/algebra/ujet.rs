use std::fmt;

use num_traits::Zero;

use super::{AlgebraError, Rat};

/// Truncated univariate power series: coefficients of `t^0 .. t^trunc`.
#[derive(Clone, PartialEq, Eq)]
pub struct UJet {
    trunc: u32,
    coeffs: Vec<Rat>,
}

impl UJet {
    pub fn zero(trunc: u32) -> Self {
        UJet { trunc, coeffs: vec![Rat::zero(); trunc as usize + 1] }
    }

    pub fn variable(trunc: u32) -> Self {
        let mut jet = Self::zero(trunc);
        if trunc >= 1 {
            jet.coeffs[1] = Rat::from_integer(1.into());
        }
        jet
    }

    /// Build from coefficients indexed by degree; shorter vectors are padded,
    /// longer ones must not carry extra data.
    pub fn from_coeffs(trunc: u32, mut coeffs: Vec<Rat>) -> Result<Self, AlgebraError> {
        if coeffs.len() > trunc as usize + 1 {
            for c in &coeffs[trunc as usize + 1..] {
                if !c.is_zero() {
                    return Err(AlgebraError::DegreeOutOfRange(
                        coeffs.len() as u32 - 1,
                        trunc,
                    ));
                }
            }
        }
        coeffs.resize(trunc as usize + 1, Rat::zero());
        Ok(UJet { trunc, coeffs })
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn coefficient(&self, k: u32) -> Rat {
        self.coeffs.get(k as usize).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coefficients(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rat::is_zero)
    }

    pub fn vanishes_at_origin(&self) -> bool {
        self.coeffs[0].is_zero()
    }

    /// Order of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|p| p as u32)
    }

    fn check_compatible(&self, other: &UJet) -> Result<(), AlgebraError> {
        if self.trunc != other.trunc {
            return Err(AlgebraError::TruncationMismatch(self.trunc, other.trunc));
        }
        Ok(())
    }

    pub fn add(&self, other: &UJet) -> Result<UJet, AlgebraError> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(UJet { trunc: self.trunc, coeffs })
    }

    pub fn sub(&self, other: &UJet) -> Result<UJet, AlgebraError> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(UJet { trunc: self.trunc, coeffs })
    }

    pub fn scale(&self, factor: &Rat) -> UJet {
        UJet {
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn mul(&self, other: &UJet) -> Result<UJet, AlgebraError> {
        self.check_compatible(other)?;
        let mut coeffs = vec![Rat::zero(); self.trunc as usize + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j > self.trunc as usize {
                    break;
                }
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        Ok(UJet { trunc: self.trunc, coeffs })
    }

    /// Multiplicative inverse of a unit jet, by long division.
    pub fn inverse(&self) -> Result<UJet, AlgebraError> {
        if self.coeffs[0].is_zero() {
            return Err(AlgebraError::NotAUnit);
        }
        let lead = self.coeffs[0].clone();
        let mut inv = vec![Rat::zero(); self.trunc as usize + 1];
        inv[0] = lead.recip();
        for k in 1..=self.trunc as usize {
            let mut acc = Rat::zero();
            for j in 1..=k {
                acc += &self.coeffs[j] * &inv[k - j];
            }
            inv[k] = -acc / &lead;
        }
        Ok(UJet { trunc: self.trunc, coeffs: inv })
    }

    /// Substitute `t := inner(t)` where `inner` vanishes at the origin.
    pub fn compose(&self, inner: &UJet) -> Result<UJet, AlgebraError> {
        self.check_compatible(inner)?;
        if !inner.vanishes_at_origin() {
            return Err(AlgebraError::OriginNotPreserved);
        }
        // Horner from the top coefficient down
        let mut acc = UJet::zero(self.trunc);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner)?;
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    /// Compositional inverse: `g` with `self(g(t)) = t` up to the truncation.
    ///
    /// Requires a simple zero at the origin. Solved order by order; the
    /// leading coefficient of `g` is the reciprocal of `self`'s.
    pub fn reverse(&self) -> Result<UJet, AlgebraError> {
        if !self.vanishes_at_origin() || self.coefficient(1).is_zero() {
            return Err(AlgebraError::NotReversible);
        }
        let lead = self.coefficient(1);
        let mut g = UJet::zero(self.trunc);
        for k in 1..=self.trunc {
            let h = self.compose(&g)?;
            let target = if k == 1 { Rat::from_integer(1.into()) } else { Rat::zero() };
            let correction = (target - h.coefficient(k)) / &lead;
            g.coeffs[k as usize] = correction;
        }
        Ok(g)
    }
}

impl fmt::Debug for UJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UJet[T={}]({})", self.trunc, self)
    }
}

impl fmt::Display for UJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_traits::{One, Signed};
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{}", mag)?,
                1 if mag.is_one() => write!(f, "t")?,
                1 => write!(f, "{}*t", mag)?,
                _ if mag.is_one() => write!(f, "t^{}", k)?,
                _ => write!(f, "{}*t^{}", mag, k)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{rat, ratio};
    use super::*;

    fn from(trunc: u32, coeffs: &[i64]) -> UJet {
        UJet::from_coeffs(trunc, coeffs.iter().map(|&c| rat(c)).collect()).unwrap()
    }

    #[test]
    fn reverse_examples() {
        // f = t is its own inverse
        let f = UJet::variable(4);
        assert_eq!(f.reverse().unwrap(), f);

        // f = 2t reverses to t/2
        let f = from(2, &[0, 2]);
        let g = f.reverse().unwrap();
        assert_eq!(g.coefficient(1), ratio(1, 2));
        assert_eq!(g.coefficient(2), rat(0));

        // f = t + t^2 at order 5: the signed Catalan expansion.
        // Frozen values verified by the compose-back oracle below.
        let f = from(5, &[0, 1, 1]);
        let g = f.reverse().unwrap();
        let expected = from(5, &[0, 1, -1, 2, -5, 14]);
        assert_eq!(g, expected);
        assert_eq!(f.compose(&g).unwrap(), UJet::variable(5));
        assert_eq!(g.compose(&f).unwrap(), UJet::variable(5));

        assert!(matches!(from(3, &[1, 1]).reverse(), Err(AlgebraError::NotReversible)));
        assert!(matches!(from(3, &[0, 0, 1]).reverse(), Err(AlgebraError::NotReversible)));
    }

    #[test]
    fn inverse_and_mul() {
        let f = from(3, &[1, 1]);
        let inv = f.inverse().unwrap();
        assert_eq!(inv, from(3, &[1, -1, 1, -1]));
        assert_eq!(f.mul(&inv).unwrap(), from(3, &[1]));
    }

    #[test]
    fn compose_requires_origin() {
        let f = from(3, &[0, 1]);
        assert!(matches!(
            f.compose(&from(3, &[1, 1])),
            Err(AlgebraError::OriginNotPreserved)
        ));
    }
}
