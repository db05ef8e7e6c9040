//! The S^2-rank-1 test.
//!
//! A family has S^2-rank 1 when every 2-minor, obtained by restricting to
//! four points `x1 < x2 < x3 < x4` and two coordinates `a1 < a2`, has
//! vanishing `det^{S^2}`.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior_det::{det_s2, SixColumnInput, Vec2, SIX_COLUMN_ORDER};
use crate::matrix::RationalMatrix;
use crate::pairs::{quadruples, triples, PairFamily};
use crate::par::{self, Execution};
use crate::rational::{serde_str, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MinorSelector {
    pub quadruple: [usize; 4],
    pub coords: (usize, usize),
}

impl MinorSelector {
    pub fn new(quadruple: [usize; 4], coords: (usize, usize)) -> Self {
        Self { quadruple, coords }
    }
}

impl std::fmt::Display for MinorSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [x1, x2, x3, x4] = self.quadruple;
        write!(
            f,
            "points ({x1},{x2},{x3},{x4}) coords ({},{})",
            self.coords.0, self.coords.1
        )
    }
}

/// A 2-minor with nonzero `det^{S^2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankViolation {
    pub selector: MinorSelector,
    #[serde(with = "serde_str")]
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct S2RankVerdict {
    pub rank_one: bool,
    pub minors_checked: usize,
    /// Every violating minor, ordered by selector.
    pub violations: Vec<RankViolation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TripleRank {
    pub triple: (usize, usize, usize),
    pub rank: usize,
}

/// All selectors for an `s`-point, `d`-coordinate family, in order.
pub fn minor_selectors(s: usize, d: usize) -> Vec<MinorSelector> {
    let coords: Vec<(usize, usize)> = (1..=d).flat_map(|a1| (a1 + 1..=d).map(move |a2| (a1, a2))).collect();
    quadruples(s)
        .into_iter()
        .flat_map(|q| coords.iter().map(move |&c| MinorSelector::new(q, c)))
        .collect()
}

/// The minor `w_{i,j} = [v^{a1}_{x_i,x_j}; v^{a2}_{x_i,x_j}]`.
pub fn extract_minor(fam: &PairFamily, sel: &MinorSelector) -> Result<SixColumnInput> {
    let q = sel.quadruple;
    let (a1, a2) = sel.coords;
    if !(1 <= q[0] && q[0] < q[1] && q[1] < q[2] && q[2] < q[3] && q[3] <= fam.s()) {
        return Err(Error::OutOfBounds(format!(
            "quadruple {q:?} is not increasing within 1..={}",
            fam.s()
        )));
    }
    if !(1 <= a1 && a1 < a2 && a2 <= fam.d()) {
        return Err(Error::OutOfBounds(format!(
            "coordinates ({a1},{a2}) are not increasing within 1..={}",
            fam.d()
        )));
    }
    let columns = SIX_COLUMN_ORDER.map(|(i, j)| {
        let v = fam.column(q[i - 1], q[j - 1]);
        Vec2::new(v[a1 - 1].clone(), v[a2 - 1].clone())
    });
    Ok(SixColumnInput::new(columns))
}

fn check_preconditions(fam: &PairFamily) -> Result<()> {
    if fam.s() < 4 || fam.d() < 2 {
        return Err(Error::TooSmall { s: fam.s(), d: fam.d() });
    }
    if fam.is_zero() {
        return Err(Error::ZeroFamily);
    }
    Ok(())
}

fn minor_value(fam: &PairFamily, sel: &MinorSelector) -> Rational {
    det_s2(&extract_minor(fam, sel).expect("selectors are generated in range"))
}

/// Evaluates every 2-minor and collects all violations.
pub fn s2_rank_is_one(fam: &PairFamily) -> Result<S2RankVerdict> {
    s2_rank_is_one_with(fam, Execution::default())
}

pub fn s2_rank_is_one_with(fam: &PairFamily, mode: Execution) -> Result<S2RankVerdict> {
    check_preconditions(fam)?;
    let selectors = minor_selectors(fam.s(), fam.d());
    let violations = par::filter_map(mode, &selectors, |sel| {
        let value = minor_value(fam, sel);
        (!value.is_zero()).then_some(RankViolation { selector: *sel, value })
    });
    Ok(S2RankVerdict {
        rank_one: violations.is_empty(),
        minors_checked: selectors.len(),
        violations,
    })
}

/// Short-circuiting variant of [`s2_rank_is_one`].
pub fn s2_rank_is_one_fast(fam: &PairFamily) -> Result<bool> {
    check_preconditions(fam)?;
    let selectors = minor_selectors(fam.s(), fam.d());
    let any_bad = par::any(Execution::default(), &selectors, |sel| !minor_value(fam, sel).is_zero());
    Ok(!any_bad)
}

/// Rank of `[v_{i,j}, v_{i,k}, v_{j,k}]` for every triple `i < j < k`.
pub fn triple_rank_bound(fam: &PairFamily) -> Vec<TripleRank> {
    triple_rank_bound_with(fam, Execution::default())
}

pub fn triple_rank_bound_with(fam: &PairFamily, mode: Execution) -> Vec<TripleRank> {
    par::map(mode, &triples(fam.s()), |&(i, j, k)| {
        let m = RationalMatrix::from_columns(&[fam.column(i, j), fam.column(i, k), fam.column(j, k)])
            .expect("columns share length d");
        TripleRank {
            triple: (i, j, k),
            rank: m.rank_exact(),
        }
    })
}
