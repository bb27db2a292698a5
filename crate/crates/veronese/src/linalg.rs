//! Exact rational linear algebra: rank, inverse, and linear solves by
//! Gaussian elimination over the rationals. Everything is deterministic and
//! exact; pivots are simply the first nonzero entries.

use num_traits::{One, Zero};

use crate::algebra::Rat;

/// Dense rational matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat {
    rows: Vec<Vec<Rat>>,
    cols: usize,
}

impl Mat {
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Mat { rows, cols }
    }

    pub fn identity(k: usize) -> Self {
        let rows = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                    .collect()
            })
            .collect();
        Mat { rows, cols: k }
    }

    pub fn zero(r: usize, c: usize) -> Self {
        Mat { rows: vec![vec![Rat::zero(); c]; r], cols: c }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.rows[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.rows[i][j] = v;
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.rows
    }

    pub fn is_identity(&self) -> bool {
        self.nrows() == self.cols && *self == Mat::identity(self.cols)
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zero(self.cols, self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out.rows[j][i] = v.clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.nrows(), "dimension mismatch");
        let mut out = Mat::zero(self.nrows(), other.cols);
        for i in 0..self.nrows() {
            for k in 0..self.cols {
                let a = &self.rows[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.rows[k][j];
                    if !b.is_zero() {
                        out.rows[i][j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        let mut m = self.rows.clone();
        row_echelon(&mut m).len()
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<Mat> {
        let k = self.nrows();
        if k != self.cols {
            return None;
        }
        // Gauss-Jordan on [self | I]
        let mut aug: Vec<Vec<Rat>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..k).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
                r
            })
            .collect();
        for col in 0..k {
            let pivot = (col..k).find(|&i| !aug[i][col].is_zero())?;
            aug.swap(col, pivot);
            let inv = aug[col][col].clone().recip();
            for v in &mut aug[col] {
                *v *= &inv;
            }
            for i in 0..k {
                if i == col || aug[i][col].is_zero() {
                    continue;
                }
                let factor = aug[i][col].clone();
                for j in 0..2 * k {
                    let delta = &aug[col][j] * &factor;
                    aug[i][j] -= delta;
                }
            }
        }
        let rows = aug.into_iter().map(|r| r[k..].to_vec()).collect();
        Some(Mat::from_rows(rows))
    }
}

/// Reduce rows in place to row echelon form; returns the pivot columns.
fn row_echelon(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = m[rank][col].clone().recip();
        for v in &mut m[rank] {
            *v *= &inv;
        }
        for i in 0..rows {
            if i == rank || m[i][col].is_zero() {
                continue;
            }
            let factor = m[i][col].clone();
            for j in col..cols {
                let delta = &m[rank][j] * &factor;
                m[i][j] -= delta;
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    pivots
}

/// Outcome of an exact linear solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Inconsistent,
    /// A particular solution with free variables set to zero.
    Solved { solution: Vec<Rat>, unique: bool },
}

/// Solve `A x = b` exactly.
pub fn solve(a: &Mat, b: &[Rat]) -> SolveOutcome {
    assert_eq!(a.nrows(), b.len(), "dimension mismatch");
    let cols = a.ncols();
    let mut aug: Vec<Vec<Rat>> = a
        .rows()
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = row_echelon(&mut aug);
    if pivots.contains(&cols) {
        return SolveOutcome::Inconsistent;
    }
    let mut solution = vec![Rat::zero(); cols];
    for (row, &col) in pivots.iter().enumerate() {
        solution[col] = aug[row][cols].clone();
    }
    SolveOutcome::Solved { unique: pivots.len() == cols, solution }
}

/// Rank of a family of rational row vectors, computed exactly.
pub fn exact_rank(rows: &[Vec<Rat>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    Mat::from_rows(rows.to_vec()).rank()
}
