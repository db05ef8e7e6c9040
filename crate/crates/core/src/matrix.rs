//! Dense rational matrices with exact determinant, rank and nullspace.
//!
//! Determinant and rank clear denominators row by row and then run
//! fraction-free (Bareiss) elimination over big integers, so intermediate
//! values stay integral and every division is exact. The nullspace uses
//! Gauss-Jordan reduction over the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{lcm_of_denominators, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds a matrix from row vectors; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let n = rows.len();
        Self::new(n, cols, rows.into_iter().flatten().collect())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[&[Rational]]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("columns of different lengths".into()));
        }
        let mut m = Self::zeros(rows, columns.len());
        for (c, column) in columns.iter().enumerate() {
            for (r, v) in column.iter().enumerate() {
                m.set(r, c, v.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rational) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    /// The submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let entries = rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| self.get(r, c).clone()))
            .collect();
        Self {
            rows: rows.len(),
            cols: cols.len(),
            entries,
        }
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols, "vector length must equal column count");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Exact determinant; fails for non-square input.
    pub fn det_exact(&self) -> Result<Rational> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let (mut rows, scale) = self.integer_rows();
        let det = bareiss_det(&mut rows);
        Ok(Rational::new(det, scale))
    }

    /// Exact rank over the rationals.
    pub fn rank_exact(&self) -> usize {
        let (mut rows, _) = self.integer_rows();
        bareiss_rank(&mut rows, self.cols)
    }

    /// A basis of `{x : Ax = 0}` in reduced form: one vector per free column,
    /// with a `1` in that column and zeros in the other free columns.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let mut m: Vec<Vec<Rational>> = (0..self.rows).map(|r| self.row(r).to_vec()).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            let inv = m[r][c].recip();
            for v in m[r][c..].iter_mut() {
                *v *= &inv;
            }
            let pivot_row = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let factor = row[c].clone();
                for (v, p) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                    *v -= &factor * p;
                }
            }
            pivots.push(c);
            r += 1;
        }

        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![Rational::zero(); self.cols];
                x[f] = Rational::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    x[pc] = -m[row][f].clone();
                }
                x
            })
            .collect()
    }

    /// Rows scaled to integers, together with the product of the scale
    /// factors (so `det(self) = det(rows) / scale`).
    fn integer_rows(&self) -> (Vec<Vec<BigInt>>, BigInt) {
        let mut scale = BigInt::one();
        let rows = (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let l = lcm_of_denominators(row);
                let ints = row.iter().map(|v| v.numer() * (&l / v.denom())).collect();
                scale *= &l;
                ints
            })
            .collect();
        (rows, scale)
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let cells: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

fn exact_div(num: BigInt, den: &BigInt) -> BigInt {
    let (q, rem) = num.div_rem(den);
    debug_assert!(rem.is_zero(), "Bareiss division must be exact");
    q
}

fn bareiss_det(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            negate = !negate;
        }
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest {
            for j in k + 1..n {
                let v = &row[j] * &pivot_row[k] - &row[k] * &pivot_row[j];
                row[j] = exact_div(v, &prev);
            }
            row[k] = BigInt::zero();
        }
        prev = pivot_row[k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

fn bareiss_rank(a: &mut [Vec<BigInt>], cols: usize) -> usize {
    let rows = a.len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest {
            for j in c + 1..cols {
                let v = &row[j] * &pivot_row[c] - &row[c] * &pivot_row[j];
                row[j] = exact_div(v, &prev);
            }
            row[c] = BigInt::zero();
        }
        prev = pivot_row[c].clone();
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn m(rows: Vec<Vec<Rational>>) -> RationalMatrix {
        RationalMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn small_determinants() {
        assert_eq!(m(vec![vec![rat(7, 2)]]).det_exact().unwrap(), rat(7, 2));
        let two = m(vec![vec![int(1), int(2)], vec![int(3), int(4)]]);
        assert_eq!(two.det_exact().unwrap(), int(-2));
        assert_eq!(RationalMatrix::identity(6).det_exact().unwrap(), int(1));
        assert_eq!(RationalMatrix::zeros(0, 0).det_exact().unwrap(), int(1));
    }

    #[test]
    fn determinant_needs_row_swap() {
        let a = m(vec![
            vec![int(0), int(1), int(0)],
            vec![int(1), int(0), int(0)],
            vec![int(0), int(0), rat(1, 3)],
        ]);
        assert_eq!(a.det_exact().unwrap(), rat(-1, 3));
    }

    #[test]
    fn non_square_is_an_error() {
        let a = RationalMatrix::zeros(2, 3);
        assert!(matches!(a.det_exact(), Err(Error::NonSquare { rows: 2, cols: 3 })));
    }

    #[test]
    fn ranks() {
        assert_eq!(RationalMatrix::zeros(3, 4).rank_exact(), 0);
        // columns v_{1,2}, v_{1,3}, v_{2,3} of table A
        let a = m(vec![
            vec![rat(1, 2), rat(7, 10), rat(4, 5)],
            vec![rat(1, 2), rat(3, 10), rat(1, 5)],
        ]);
        assert_eq!(a.rank_exact(), 2);
        let u = [rat(1, 2), int(-3), rat(2, 7)];
        let v = [int(4), rat(1, 9), int(0), rat(-5, 3)];
        let outer = m(u.iter().map(|x| v.iter().map(|y| x * y).collect()).collect());
        assert_eq!(outer.rank_exact(), 1);
    }

    #[test]
    fn rank_with_skipped_columns() {
        let a = m(vec![
            vec![int(0), int(1), int(2), int(3)],
            vec![int(0), int(2), int(4), int(7)],
            vec![int(0), int(3), int(6), int(10)],
        ]);
        assert_eq!(a.rank_exact(), 2);
    }

    #[test]
    fn nullspace_basis() {
        let a = m(vec![vec![int(1), int(1), int(0)], vec![int(0), int(0), int(1)]]);
        let ns = a.nullspace();
        assert_eq!(ns, vec![vec![int(-1), int(1), int(0)]]);
        for x in &ns {
            assert!(a.mul_vec(x).iter().all(Zero::is_zero));
        }
        assert_eq!(RationalMatrix::identity(3).nullspace().len(), 0);
        assert_eq!(RationalMatrix::zeros(2, 3).nullspace().len(), 3);
    }
}
