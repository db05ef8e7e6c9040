//! The `det^{S^2}` map on six vectors of the plane.
//!
//! Columns are indexed by the pairs `(i,j)`, `1 <= i < j <= 4`, always in the
//! fixed order `(1,2), (2,3), (3,4), (1,3), (2,4), (1,4)`. The map is
//! multilinear in the six columns and vanishes whenever the three columns of
//! a triangle `x < y < z` coincide.

use crate::error::Result;
use crate::matrix::RationalMatrix;
use crate::rational::Rational;

/// The fixed column order of a six-column input.
pub const SIX_COLUMN_ORDER: [(usize, usize); 6] = [(1, 2), (2, 3), (3, 4), (1, 3), (2, 4), (1, 4)];

/// A vector of the plane, `[a; b]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vec2 {
    pub a: Rational,
    pub b: Rational,
}

impl Vec2 {
    pub fn new(a: Rational, b: Rational) -> Self {
        Self { a, b }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SixColumnInput {
    pub columns: [Vec2; 6],
}

impl SixColumnInput {
    pub fn new(columns: [Vec2; 6]) -> Self {
        Self { columns }
    }

    /// Builds the input from the two rows of a 2x6 table.
    pub fn from_rows(top: [Rational; 6], bottom: [Rational; 6]) -> Self {
        let mut bottom = bottom.into_iter();
        Self {
            columns: top.map(|a| Vec2::new(a, bottom.next().expect("six entries"))),
        }
    }

    /// Column `v_{i,j}`.
    ///
    /// Panics unless `1 <= i < j <= 4`.
    pub fn column(&self, i: usize, j: usize) -> &Vec2 {
        let pos = SIX_COLUMN_ORDER
            .iter()
            .position(|&p| p == (i, j))
            .unwrap_or_else(|| panic!("({i},{j}) is not a pair of {{1,2,3,4}}"));
        &self.columns[pos]
    }

    /// Swaps the two coordinates of every column.
    pub fn swap_coordinates(&self) -> Self {
        Self {
            columns: self.columns.clone().map(|v| Vec2::new(v.b, v.a)),
        }
    }
}

/// The twelve-term polynomial.
pub fn det_s2(input: &SixColumnInput) -> Rational {
    let [c12, c23, c34, c13, c24, c14] = &input.columns;
    let (a12, b12) = (&c12.a, &c12.b);
    let (a23, b23) = (&c23.a, &c23.b);
    let (a34, b34) = (&c34.a, &c34.b);
    let (a13, b13) = (&c13.a, &c13.b);
    let (a24, b24) = (&c24.a, &c24.b);
    let (a14, b14) = (&c14.a, &c14.b);

    let term = |f: [&Rational; 6]| -> Rational { f.into_iter().product() };

    let positive = term([a12, a23, a34, b13, b24, b14])
        + term([a12, b23, a34, b13, b24, a14])
        + term([a12, b23, b34, a13, a24, b14])
        + term([b12, b23, a34, a13, a24, b14])
        + term([b12, a23, b34, b13, a24, a14])
        + term([b12, a23, b34, a13, b24, a14]);
    let negative = term([b12, b23, b34, a13, a24, a14])
        + term([b12, a23, b34, a13, a24, b14])
        + term([b12, a23, a34, b13, b24, a14])
        + term([a12, a23, b34, b13, b24, a14])
        + term([a12, b23, a34, a13, b24, b14])
        + term([a12, b23, a34, b13, a24, b14]);
    positive - negative
}

/// The 6x6 matrix whose ordinary determinant equals `det^{S^2}`.
///
/// Its rows are the coordinate rows of the three relations
/// `x12 v12 + x23 v23 - x13 v13`, `x12 v12 + x24 v24 - x14 v14` and
/// `x34 v34 + x13 v13 - x14 v14`, with unknowns in the column order.
pub fn companion_matrix(input: &SixColumnInput) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(6, 6);
    let mut put = |row: usize, col: usize, v: &Vec2, negate: bool| {
        let (a, b) = if negate {
            (-v.a.clone(), -v.b.clone())
        } else {
            (v.a.clone(), v.b.clone())
        };
        m.set(row, col, a);
        m.set(row + 1, col, b);
    };
    let v = |i, j| input.column(i, j);

    put(0, 0, v(1, 2), false);
    put(0, 1, v(2, 3), false);
    put(0, 3, v(1, 3), true);

    put(2, 0, v(1, 2), false);
    put(2, 4, v(2, 4), false);
    put(2, 5, v(1, 4), true);

    put(4, 2, v(3, 4), false);
    put(4, 3, v(1, 3), false);
    put(4, 5, v(1, 4), true);
    m
}

/// `det^{S^2}` evaluated as the determinant of [`companion_matrix`].
pub fn det_s2_companion(input: &SixColumnInput) -> Rational {
    companion_matrix(input).det_exact().expect("companion matrix is 6x6")
}

/// Exact determinant of a square matrix.
pub fn det_exact(m: &RationalMatrix) -> Result<Rational> {
    m.det_exact()
}

/// Exact rank of a matrix.
pub fn rank_exact(m: &RationalMatrix) -> usize {
    m.rank_exact()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, parse_rational, rat};
    use num_traits::Zero;

    fn binary(top: [&str; 6]) -> SixColumnInput {
        let top = top.map(|t| parse_rational(t).unwrap());
        let bottom = top.clone().map(|t| int(1) - t);
        SixColumnInput::from_rows(top, bottom)
    }

    #[test]
    fn table_a_is_nonzero() {
        let va = binary(["0.5", "0.8", "0.2", "0.7", "0.7", "0.6"]);
        assert_eq!(det_s2(&va), rat(-7, 1000));
        assert_eq!(det_s2_companion(&va), rat(-7, 1000));
    }

    #[test]
    fn table_b_vanishes() {
        let vb = binary(["0.5", "0.75", "0.25", "0.7", "0.65", "0.625"]);
        assert!(det_s2(&vb).is_zero());
        assert!(det_s2_companion(&vb).is_zero());
    }

    #[test]
    fn companion_matches_displayed_system() {
        // the weight system of table B
        let vb = binary(["0.5", "0.75", "0.25", "0.7", "0.65", "0.625"]);
        let p = |s: &str| parse_rational(s).unwrap();
        let expected = [
            ["0.5", "0.75", "0", "-0.7", "0", "0"],
            ["0.5", "0.25", "0", "-0.3", "0", "0"],
            ["0.5", "0", "0", "0", "0.65", "-0.625"],
            ["0.5", "0", "0", "0", "0.35", "-0.375"],
            ["0", "0", "0.25", "0.7", "0", "-0.625"],
            ["0", "0", "0.75", "0.3", "0", "-0.375"],
        ];
        let expected =
            RationalMatrix::from_rows(expected.iter().map(|r| r.iter().map(|s| p(s)).collect()).collect()).unwrap();
        assert_eq!(companion_matrix(&vb), expected);
    }

    #[test]
    fn equal_columns_vanish() {
        let e1 = Vec2::new(int(1), int(0));
        let all = SixColumnInput::new(std::array::from_fn(|_| e1.clone()));
        assert!(det_s2(&all).is_zero());

        let ones = Vec2::new(int(1), int(1));
        let triangle = SixColumnInput::new([
            ones.clone(),
            ones.clone(),
            e1.clone(),
            ones,
            Vec2::new(int(0), int(1)),
            Vec2::new(int(1), int(1)),
        ]);
        assert!(det_s2(&triangle).is_zero());
        assert!(det_s2_companion(&triangle).is_zero());
    }

    #[test]
    fn zero_column_vanishes() {
        let mut cols: [Vec2; 6] = std::array::from_fn(|k| Vec2::new(int(k as i64 + 1), rat(1, k as i64 + 2)));
        cols[4] = Vec2::new(int(0), int(0));
        let x = SixColumnInput::new(cols);
        assert!(det_s2(&x).is_zero());
        assert!(det_s2_companion(&x).is_zero());
    }
}
