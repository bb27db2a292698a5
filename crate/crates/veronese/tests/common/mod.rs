//! Shared helpers for the integration suites: seeded generators and the
//! independent oracles the main code is checked against.

#![allow(dead_code)]

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use veronese::algebra::{monomials_up_to, MJet, Rat};
use veronese::projective::random_rat;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random jet with roughly `density` out of 4 monomials populated.
pub fn random_mjet(rng: &mut ChaCha8Rng, n: usize, trunc: u32, magnitude: u32, density: u32) -> MJet {
    let mut jet = MJet::zero(n, trunc);
    for alpha in monomials_up_to(n, trunc) {
        if rng.gen_range(0..4) < density {
            let c = random_rat(rng, magnitude);
            if !c.is_zero() {
                jet = jet
                    .add(&MJet::monomial(n, trunc, alpha.clone(), c))
                    .unwrap();
            }
        }
    }
    jet
}

/// Random jet vanishing at the origin (suitable as a substitution map).
pub fn random_origin_mjet(
    rng: &mut ChaCha8Rng,
    n: usize,
    trunc: u32,
    magnitude: u32,
    density: u32,
) -> MJet {
    let jet = random_mjet(rng, n, trunc, magnitude, density);
    let c = jet.constant_term();
    if c.is_zero() {
        jet
    } else {
        jet.sub(&MJet::constant(n, trunc, c)).unwrap()
    }
}

/// Determinant by Laplace expansion along the first row. Exponential, only
/// used as an oracle on tiny matrices.
pub fn det_laplace(m: &[Vec<Rat>]) -> Rat {
    let k = m.len();
    if k == 0 {
        return Rat::from_integer(1.into());
    }
    if k == 1 {
        return m[0][0].clone();
    }
    let mut acc = Rat::zero();
    for (j, top) in m[0].iter().enumerate() {
        if top.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rat>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let cofactor = det_laplace(&minor);
        let signed = if j % 2 == 0 { cofactor } else { -cofactor };
        acc += top * signed;
    }
    acc
}

/// Rank as the size of the largest nonvanishing minor, by enumeration.
pub fn minor_rank(rows: &[Vec<Rat>]) -> usize {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    let max = r.min(c);
    for size in (1..=max).rev() {
        for row_set in subsets(r, size) {
            for col_set in subsets(c, size) {
                let minor: Vec<Vec<Rat>> = row_set
                    .iter()
                    .map(|&i| col_set.iter().map(|&j| rows[i][j].clone()).collect())
                    .collect();
                if !det_laplace(&minor).is_zero() {
                    return size;
                }
            }
        }
    }
    0
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn go(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            go(i + 1, n, k, current, out);
            current.pop();
        }
    }
    go(0, n, k, &mut current, &mut out);
    out
}

/// Nonzero integer direction vector.
pub fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rat> {
    loop {
        let sigma: Vec<Rat> = (0..n)
            .map(|_| Rat::from_integer(rng.gen_range(-3i64..=3).into()))
            .collect();
        if !sigma.iter().all(Rat::is_zero) {
            return sigma;
        }
    }
}
