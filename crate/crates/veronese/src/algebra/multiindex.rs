use std::cmp::Ordering;
use std::fmt;

use super::AlgebraError;

/// Exponent vector of a monomial in `n` variables.
///
/// The derived order is graded lexicographic with `s1` greatest: indices
/// compare by total weight first, then lexicographically on entries with a
/// larger leading exponent sorting earlier. Iterating a `BTreeMap` keyed by
/// `MultiIndex` therefore visits monomials in the canonical coordinate
/// order used for germ components.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    /// The zero index (constant monomial) in `n` variables.
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// Unit index `e_i`, the exponent of the bare variable `s_{i+1}`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    /// Principal pivot `(w, 0, ..., 0)`.
    pub fn pivot(n: usize, w: u32) -> Self {
        let mut e = vec![0; n];
        e[0] = w;
        MultiIndex(e)
    }

    /// Mixed pivot `(w-1, 0, ..., 1, ..., 0)` with the 1 at position `j >= 1`.
    pub fn pivot_with(n: usize, w: u32, j: usize) -> Self {
        debug_assert!(j >= 1 && j < n && w >= 1);
        let mut e = vec![0; n];
        e[0] = w - 1;
        e[j] += 1;
        MultiIndex(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree `|alpha|`, recomputed on every call.
    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise sum (monomial product).
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise difference when defined (monomial division).
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// Divide by the variable `s_{i+1}` once, if possible.
    pub fn checked_div_var(&self, i: usize) -> Option<MultiIndex> {
        if self.0[i] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[i] -= 1;
        Some(MultiIndex(e))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            // within a weight, lexicographically larger entries come first
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Binomial coefficient as a machine integer; the sizes used here are tiny.
pub fn binomial(n: u64, k: u64) -> usize {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// All exponent vectors of total weight `w` in canonical order.
pub fn monomials_of_weight(n: usize, w: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fill(&mut out, &mut current, 0, w);
    fn fill(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, pos: usize, rem: u32) {
        if pos + 1 == current.len() {
            current[pos] = rem;
            out.push(MultiIndex::new(current.clone()));
            return;
        }
        for e in (0..=rem).rev() {
            current[pos] = e;
            fill(out, current, pos + 1, rem - e);
        }
        current[pos] = 0;
    }
    out
}

/// All exponent vectors of weight `1..=max` in canonical order.
pub fn monomials_up_to(n: usize, max: u32) -> Vec<MultiIndex> {
    (1..=max).flat_map(|w| monomials_of_weight(n, w)).collect()
}

/// Coordinate layout of a weight-graded ambient: all multi-indices of
/// weight `1..=q` in canonical order.
pub fn canonical_indices(n: usize, q: u32) -> Vec<MultiIndex> {
    monomials_up_to(n, q)
}

/// Dimension of the ambient projective space, `C(n+q, n) - 1`.
pub fn ambient_dim(n: usize, q: u32) -> usize {
    binomial((n as u64) + (q as u64), n as u64) - 1
}

/// Position of `alpha` in the canonical coordinate layout.
pub fn canonical_index(alpha: &MultiIndex, n: usize, q: u32) -> Result<usize, AlgebraError> {
    if alpha.len() != n {
        return Err(AlgebraError::ArityMismatch(alpha.len(), n));
    }
    let w = alpha.weight();
    if w < 1 || w > q {
        return Err(AlgebraError::WeightOutOfRange { weight: w, max: q });
    }
    let mut offset = 0;
    for lower in 1..w {
        offset += binomial((n as u64) + (lower as u64) - 1, lower as u64);
    }
    let pos = monomials_of_weight(n, w)
        .iter()
        .position(|m| m == alpha)
        .expect("enumeration covers every index of this weight");
    Ok(offset + pos)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn canonical_order_n2_q2() {
        let idx = canonical_indices(2, 2);
        let expected = [
            mi(&[1, 0]),
            mi(&[0, 1]),
            mi(&[2, 0]),
            mi(&[1, 1]),
            mi(&[0, 2]),
        ];
        assert_eq!(idx, expected);
        assert_eq!(canonical_index(&mi(&[1, 0]), 2, 2).unwrap(), 0);
        assert_eq!(canonical_index(&mi(&[1, 1]), 2, 2).unwrap(), 3);
    }

    #[test]
    fn canonical_index_rejects_out_of_range() {
        assert!(matches!(
            canonical_index(&mi(&[0, 3]), 2, 2),
            Err(AlgebraError::WeightOutOfRange { weight: 3, max: 2 })
        ));
        assert!(matches!(
            canonical_index(&mi(&[0, 0]), 2, 2),
            Err(AlgebraError::WeightOutOfRange { .. })
        ));
        assert!(matches!(
            canonical_index(&mi(&[1, 0, 0]), 2, 2),
            Err(AlgebraError::ArityMismatch(3, 2))
        ));
    }

    #[test]
    fn ambient_dims() {
        assert_eq!(ambient_dim(2, 2), 5);
        assert_eq!(ambient_dim(3, 2), 9);
        assert_eq!(ambient_dim(2, 3), 9);
        assert_eq!(ambient_dim(1, 4), 4);
    }

    #[test]
    fn ordering_is_graded_then_lex_desc() {
        assert!(mi(&[1, 0]) < mi(&[0, 1]));
        assert!(mi(&[0, 1]) < mi(&[2, 0]));
        assert!(mi(&[2, 0]) < mi(&[1, 1]));
        assert!(mi(&[1, 1]) < mi(&[0, 2]));
    }

    #[test]
    fn canonical_index_is_bijective() {
        for (n, q) in [(2usize, 2u32), (3, 2), (2, 3), (1, 4)] {
            let all = canonical_indices(n, q);
            assert_eq!(all.len(), ambient_dim(n, q));
            for (i, alpha) in all.iter().enumerate() {
                assert_eq!(canonical_index(alpha, n, q).unwrap(), i);
            }
            let mut sorted = all.clone();
            sorted.sort();
            assert_eq!(sorted, all, "Ord agrees with the canonical layout");
        }
    }

    #[test]
    fn pivots() {
        assert_eq!(MultiIndex::pivot(3, 2), mi(&[2, 0, 0]));
        assert_eq!(MultiIndex::pivot_with(3, 2, 2), mi(&[1, 0, 1]));
        assert_eq!(MultiIndex::pivot_with(2, 1, 1), mi(&[0, 1]));
    }
}
