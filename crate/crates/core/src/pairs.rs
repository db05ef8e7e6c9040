//! Pair-indexed families of vectors.
//!
//! A [`PairFamily`] holds one vector of `Q^d` for every pair `(i,j)` with
//! `1 <= i < j <= s`. Columns are stored in the canonical order: ascending
//! gap `j - i`, then ascending `i`. For `s = 4` this is
//! `(1,2), (2,3), (3,4), (1,3), (2,4), (1,4)`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{in_unit_interval, Rational};

/// The pair `(i,j)`, 1-based, `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
}

impl PairIndex {
    pub fn new(i: usize, j: usize) -> Self {
        debug_assert!(1 <= i && i < j, "invalid pair ({i},{j})");
        Self { i, j }
    }

    pub fn gap(&self) -> usize {
        self.j - self.i
    }

    /// Position in the canonical order of an `s`-point family.
    pub fn position(&self, s: usize) -> usize {
        let g = self.gap();
        (g - 1) * s - (g - 1) * g / 2 + (self.i - 1)
    }
}

impl fmt::Display for PairIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

impl Serialize for PairIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Accepts `"(1,2)"` and `"1,2"`.
impl FromStr for PairIndex {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        let inner = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(t);
        let bad = || Error::BadHeader(format!("{text:?} is not a pair (i,j)"));
        let (i, j) = inner.split_once(',').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        let j: usize = j.trim().parse().map_err(|_| bad())?;
        if i == 0 || i >= j {
            return Err(bad());
        }
        Ok(Self { i, j })
    }
}

pub fn pair_count(s: usize) -> usize {
    s * s.saturating_sub(1) / 2
}

/// All pairs of `{1..s}` in canonical order.
pub fn canonical_pairs(s: usize) -> Vec<PairIndex> {
    (1..s)
        .flat_map(|g| (1..=s - g).map(move |i| PairIndex::new(i, i + g)))
        .collect()
}

/// The `s` for which `n` is the number of pairs, if any.
pub fn points_for_pair_count(n: usize) -> Option<usize> {
    (2..).take_while(|&s| pair_count(s) <= n).find(|&s| pair_count(s) == n)
}

/// All strictly increasing triples of `{1..s}`, lexicographic.
pub fn triples(s: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 1..=s {
        for j in i + 1..=s {
            for k in j + 1..=s {
                out.push((i, j, k));
            }
        }
    }
    out
}

/// All strictly increasing quadruples of `{1..s}`, lexicographic.
pub fn quadruples(s: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for (i, j, k) in triples(s) {
        for l in k + 1..=s {
            out.push([i, j, k, l]);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairFamily {
    s: usize,
    d: usize,
    columns: Vec<Vec<Rational>>,
}

impl PairFamily {
    /// `columns` in canonical order, each of length `d`.
    pub fn new(s: usize, d: usize, columns: Vec<Vec<Rational>>) -> Result<Self> {
        if s < 2 || d < 1 {
            return Err(Error::DimensionMismatch(format!(
                "need s >= 2 and d >= 1, got s={s}, d={d}"
            )));
        }
        if columns.len() != pair_count(s) {
            return Err(Error::DimensionMismatch(format!(
                "s={s} needs {} columns, got {}",
                pair_count(s),
                columns.len()
            )));
        }
        if let Some(c) = columns.iter().position(|c| c.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "column {} has length {}, expected {d}",
                canonical_pairs(s)[c],
                columns[c].len()
            )));
        }
        Ok(Self { s, d, columns })
    }

    pub fn from_fn(s: usize, d: usize, mut f: impl FnMut(PairIndex) -> Vec<Rational>) -> Result<Self> {
        let columns = canonical_pairs(s).into_iter().map(&mut f).collect();
        Self::new(s, d, columns)
    }

    /// A `d = 2` family from its first row; the second row is `1 - top`.
    pub fn binary(s: usize, top: Vec<Rational>) -> Result<Self> {
        let columns = top
            .into_iter()
            .map(|t| {
                let rest = Rational::one() - &t;
                vec![t, rest]
            })
            .collect();
        Self::new(s, 2, columns)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pairs(&self) -> Vec<PairIndex> {
        canonical_pairs(self.s)
    }

    /// Columns in canonical order.
    pub fn columns(&self) -> &[Vec<Rational>] {
        &self.columns
    }

    pub fn column(&self, i: usize, j: usize) -> &[Rational] {
        &self.columns[PairIndex::new(i, j).position(self.s)]
    }

    pub fn column_at(&self, p: PairIndex) -> &[Rational] {
        &self.columns[p.position(self.s)]
    }

    /// Entry `v_{i,j}^a`, all indices 1-based.
    pub fn entry(&self, i: usize, j: usize, a: usize) -> &Rational {
        &self.column(i, j)[a - 1]
    }

    /// Row `a` (1-based) across all columns in canonical order.
    pub fn row(&self, a: usize) -> Vec<Rational> {
        self.columns.iter().map(|c| c[a - 1].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().flatten().all(Zero::is_zero)
    }

    /// Every entry in `[0,1]` and every column summing to exactly 1.
    pub fn is_stochastic(&self) -> bool {
        self.first_non_stochastic().is_none()
    }

    pub(crate) fn first_non_stochastic(&self) -> Option<(PairIndex, String)> {
        self.pairs().into_iter().zip(&self.columns).find_map(|(p, c)| {
            if let Some(v) = c.iter().find(|v| !in_unit_interval(v)) {
                return Some((p, format!("entry {v} of column {p} is outside [0,1]")));
            }
            let sum: Rational = c.iter().sum();
            (!sum.is_one()).then(|| (p, format!("column {p} sums to {sum}")))
        })
    }

    pub fn has_negative_entry(&self) -> bool {
        self.columns.iter().flatten().any(Signed::is_negative)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn canonical_order_for_four_points() {
        let got: Vec<String> = canonical_pairs(4).iter().map(ToString::to_string).collect();
        assert_eq!(got, ["(1,2)", "(2,3)", "(3,4)", "(1,3)", "(2,4)", "(1,4)"]);
    }

    #[test]
    fn canonical_order_for_five_points() {
        let got: Vec<String> = canonical_pairs(5).iter().map(ToString::to_string).collect();
        assert_eq!(
            got,
            ["(1,2)", "(2,3)", "(3,4)", "(4,5)", "(1,3)", "(2,4)", "(3,5)", "(1,4)", "(2,5)", "(1,5)"]
        );
    }

    #[test]
    fn position_inverts_enumeration() {
        for s in 2..9 {
            for (k, p) in canonical_pairs(s).into_iter().enumerate() {
                assert_eq!(p.position(s), k);
            }
            assert_eq!(points_for_pair_count(pair_count(s)), Some(s));
        }
        assert_eq!(points_for_pair_count(7), None);
    }

    #[test]
    fn pair_parsing() {
        assert_eq!("(1,2)".parse::<PairIndex>().unwrap(), PairIndex::new(1, 2));
        assert_eq!(" 3 , 5 ".parse::<PairIndex>().unwrap(), PairIndex::new(3, 5));
        for bad in ["(2,1)", "(0,1)", "(1,1)", "1-2", "(a,b)"] {
            assert!(bad.parse::<PairIndex>().is_err(), "{bad}");
        }
    }

    #[test]
    fn stochastic_check() {
        let fam = PairFamily::binary(2, vec![rat(1, 3)]).unwrap();
        assert!(fam.is_stochastic());
        let off = PairFamily::new(2, 2, vec![vec![rat(1, 2), rat(2, 5)]]).unwrap();
        assert!(!off.is_stochastic());
        let neg = PairFamily::new(2, 2, vec![vec![rat(3, 2), rat(-1, 2)]]).unwrap();
        assert!(!neg.is_stochastic());
    }

    #[test]
    fn shape_is_validated() {
        assert!(PairFamily::new(3, 2, vec![vec![rat(1, 2), rat(1, 2)]; 2]).is_err());
        assert!(PairFamily::new(3, 2, vec![vec![rat(1, 2)]; 3]).is_err());
        assert!(PairFamily::new(1, 2, vec![]).is_err());
    }
}
