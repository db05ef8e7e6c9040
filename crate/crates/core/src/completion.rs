//! Filling in unknown entries of a conditional table, and merging tables
//! recorded over different (compatible) partitions of the same population.
//!
//! Completion treats every unknown entry through the product
//! `u_{i,j}^a = λ_{i,j} v_{i,j}^a`, which keeps the cocycle relations
//!
//! ```text
//! λ_{i,j} v_{i,j} - λ_{i,k} v_{i,k} + λ_{j,k} v_{j,k} = 0
//! ```
//!
//! linear in the joint unknowns `(λ, u)`. Columns with unknown entries also
//! get the row `Σ_a λ_{i,j} v_{i,j}^a = λ_{i,j}`. A one-dimensional solution
//! space with positive weights determines the table uniquely.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::pairs::{canonical_pairs, pair_count, triples, PairFamily, PairIndex};
use crate::probmodel::WeightAssignment;
use crate::rational::{in_unit_interval, Rational};

/// A pair-indexed table in which individual entries may be unknown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialFamily {
    s: usize,
    d: usize,
    cells: Vec<Vec<Option<Rational>>>,
}

impl PartialFamily {
    /// `cells` in canonical pair order, `None` marking an unknown entry.
    pub fn new(s: usize, d: usize, cells: Vec<Vec<Option<Rational>>>) -> Result<Self> {
        if s < 2 || d < 1 {
            return Err(Error::DimensionMismatch(format!(
                "need s >= 2 and d >= 1, got s={s}, d={d}"
            )));
        }
        if cells.len() != pair_count(s) || cells.iter().any(|c| c.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} columns of length {d}",
                pair_count(s)
            )));
        }
        Ok(Self { s, d, cells })
    }

    pub fn from_family(fam: &PairFamily) -> Self {
        Self {
            s: fam.s(),
            d: fam.d(),
            cells: fam
                .columns()
                .iter()
                .map(|c| c.iter().cloned().map(Some).collect())
                .collect(),
        }
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn cells(&self) -> &[Vec<Option<Rational>>] {
        &self.cells
    }

    pub fn column_at(&self, p: PairIndex) -> &[Option<Rational>] {
        &self.cells[p.position(self.s)]
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().flatten().all(Option::is_some)
    }

    /// Unknown `(pair, coordinate)` cells, coordinate 1-based.
    pub fn unknown_cells(&self) -> Vec<(PairIndex, usize)> {
        canonical_pairs(self.s)
            .into_iter()
            .zip(&self.cells)
            .flat_map(|(p, col)| {
                col.iter()
                    .enumerate()
                    .filter(|(_, c)| c.is_none())
                    .map(move |(a, _)| (p, a + 1))
            })
            .collect()
    }

    pub fn to_family(&self) -> Option<PairFamily> {
        let columns = self
            .cells
            .iter()
            .map(|c| c.iter().cloned().collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        PairFamily::new(self.s, self.d, columns).ok()
    }

    fn check_known_cells(&self) -> Result<()> {
        for (p, col) in canonical_pairs(self.s).into_iter().zip(&self.cells) {
            let known: Vec<&Rational> = col.iter().flatten().collect();
            if let Some(v) = known.iter().find(|v| !in_unit_interval(v)) {
                return Err(Error::NotStochastic(format!(
                    "entry {v} of column {p} is outside [0,1]"
                )));
            }
            let sum: Rational = known.iter().copied().sum();
            let complete = known.len() == self.d;
            if (complete && !sum.is_one()) || sum > Rational::one() {
                return Err(Error::NotStochastic(format!(
                    "known entries of column {p} sum to {sum}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Completion {
    #[serde(skip)]
    pub family: PairFamily,
    /// Normalized so that `λ_{1,s} = 1`.
    pub weights: WeightAssignment,
    /// The cells that were inferred, coordinate 1-based.
    pub inferred: Vec<(PairIndex, usize)>,
}

/// Infers every unknown entry; known entries are never changed.
pub fn complete_table(pf: &PartialFamily) -> Result<Completion> {
    pf.check_known_cells()?;
    let (s, d) = (pf.s, pf.d);
    let pairs = canonical_pairs(s);
    let unknown = pf.unknown_cells();

    // unknowns: λ for every pair (canonical order), then u for every unknown cell
    let n_weights = pairs.len();
    let unknown_var = |p: PairIndex, a: usize| -> Option<usize> {
        unknown
            .iter()
            .position(|&(q, b)| q == p && b == a)
            .map(|k| n_weights + k)
    };
    let n_vars = n_weights + unknown.len();

    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let add_term = |row: &mut [Rational], p: PairIndex, a: usize, sign: &Rational| match &pf.column_at(p)[a - 1] {
        Some(v) => row[p.position(s)] += sign * v,
        None => row[unknown_var(p, a).expect("unknown cell")] += sign,
    };
    let (plus, minus) = (Rational::one(), -Rational::one());
    for (i, j, k) in triples(s) {
        for a in 1..=d {
            let mut row = vec![Rational::zero(); n_vars];
            add_term(&mut row, PairIndex::new(i, j), a, &plus);
            add_term(&mut row, PairIndex::new(i, k), a, &minus);
            add_term(&mut row, PairIndex::new(j, k), a, &plus);
            rows.push(row);
        }
    }
    for &p in &pairs {
        if pf.column_at(p).iter().all(Option::is_some) {
            continue;
        }
        let mut row = vec![Rational::zero(); n_vars];
        for a in 1..=d {
            add_term(&mut row, p, a, &plus);
        }
        row[p.position(s)] -= Rational::one();
        rows.push(row);
    }

    let system = RationalMatrix::new(rows.len(), n_vars, rows.into_iter().flatten().collect())?;
    let mut basis = system.nullspace();
    let solution = match basis.len() {
        0 => return Err(Error::Inconsistent("the table admits only the zero solution".into())),
        1 => basis.pop().expect("one vector"),
        dim => return Err(Error::Underdetermined { dim }),
    };

    let weights = &solution[..n_weights];
    let flip = weights.iter().find(|x| !x.is_zero()).is_some_and(Signed::is_negative);
    let oriented: Vec<Rational> = solution.iter().map(|x| if flip { -x } else { x.clone() }).collect();
    if !oriented[..n_weights].iter().all(Signed::is_positive) {
        return Err(Error::Inconsistent(
            "no strictly positive weights fit the known entries".into(),
        ));
    }
    let top = oriented[PairIndex::new(1, s).position(s)].clone();
    let scaled: Vec<Rational> = oriented.iter().map(|x| x / &top).collect();

    let mut columns = Vec::with_capacity(pairs.len());
    for &p in &pairs {
        let lambda = &scaled[p.position(s)];
        let col: Vec<Rational> = pf
            .column_at(p)
            .iter()
            .enumerate()
            .map(|(a, cell)| match cell {
                Some(v) => v.clone(),
                None => &scaled[unknown_var(p, a + 1).expect("unknown cell")] / lambda,
            })
            .collect();
        if let Some(v) = col.iter().find(|v| !in_unit_interval(v)) {
            return Err(Error::Inconsistent(format!(
                "inferred entry {v} of column {p} is outside [0,1]"
            )));
        }
        columns.push(col);
    }

    Ok(Completion {
        family: PairFamily::new(s, d, columns)?,
        weights: WeightAssignment::new(s, scaled[..n_weights].to_vec())?,
        inferred: unknown,
    })
}

/// Order-preserving maps of each source table's points `{1..s_src}` into the
/// combined points `{1..s}`, where `s` is the largest image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RefinementMap {
    s: usize,
    injections: Vec<Vec<usize>>,
}

impl RefinementMap {
    /// `injections[t][x - 1]` is the image of point `x` of table `t`.
    pub fn new(injections: Vec<Vec<usize>>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidRefinement(msg));
        if injections.is_empty() {
            return bad("no injections given".into());
        }
        for (t, m) in injections.iter().enumerate() {
            if m.len() < 2 {
                return bad(format!("table {}: needs at least two points", t + 1));
            }
            if m[0] < 1 {
                return bad(format!("table {}: points are numbered from 1", t + 1));
            }
            if m.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("table {}: map is not strictly increasing", t + 1));
            }
        }
        let s = injections.iter().filter_map(|m| m.last().copied()).max().unwrap_or(0);
        Ok(Self { s, injections })
    }

    pub fn identity(s: usize, tables: usize) -> Self {
        Self {
            s,
            injections: vec![(1..=s).collect(); tables],
        }
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn injections(&self) -> &[Vec<usize>] {
        &self.injections
    }

    pub fn map_pair(&self, table: usize, p: PairIndex) -> PairIndex {
        let m = &self.injections[table];
        PairIndex::new(m[p.i - 1], m[p.j - 1])
    }
}

/// Two sources disagreeing on a combined pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairConflict {
    pub pair: PairIndex,
    /// `(table index, source pair, column)` for the first and second source.
    pub first: (usize, PairIndex, Vec<String>),
    pub second: (usize, PairIndex, Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeOutcome {
    pub family: PartialFamily,
    /// Combined pairs covered by more than one source, all of which agreed.
    pub shared: Vec<PairIndex>,
}

/// Places every source column at its combined pair. Pairs no source covers
/// stay unknown; pairs covered twice must carry identical columns.
pub fn merge_tables(tables: &[PairFamily], rm: &RefinementMap) -> Result<MergeOutcome> {
    if tables.len() != rm.injections.len() {
        return Err(Error::InvalidRefinement(format!(
            "{} tables but {} injections",
            tables.len(),
            rm.injections.len()
        )));
    }
    let d = tables.first().map_or(0, PairFamily::d);
    for (t, (fam, m)) in tables.iter().zip(&rm.injections).enumerate() {
        if fam.s() != m.len() {
            return Err(Error::InvalidRefinement(format!(
                "table {} has {} points but its injection has {}",
                t + 1,
                fam.s(),
                m.len()
            )));
        }
        if fam.d() != d {
            return Err(Error::DimensionMismatch(format!(
                "table {} has d={}, expected {d}",
                t + 1,
                fam.d()
            )));
        }
        if let Some((_, why)) = fam.first_non_stochastic() {
            return Err(Error::NotStochastic(format!("table {}: {why}", t + 1)));
        }
    }

    let s = rm.s;
    let mut cells: Vec<Option<(usize, PairIndex, Vec<Rational>)>> = vec![None; pair_count(s)];
    let mut conflicts = Vec::new();
    let mut shared = Vec::new();
    for (t, fam) in tables.iter().enumerate() {
        for p in fam.pairs() {
            let target = rm.map_pair(t, p);
            let col = fam.column_at(p).to_vec();
            let slot = &mut cells[target.position(s)];
            match slot {
                None => *slot = Some((t, p, col)),
                Some((t0, p0, existing)) => {
                    if *existing == col {
                        if !shared.contains(&target) {
                            shared.push(target);
                        }
                    } else {
                        let show = |v: &[Rational]| v.iter().map(ToString::to_string).collect();
                        conflicts.push(PairConflict {
                            pair: target,
                            first: (*t0 + 1, *p0, show(existing)),
                            second: (t + 1, p, show(&col)),
                        });
                    }
                }
            }
        }
    }
    if !conflicts.is_empty() {
        return Err(Error::IncompatibleTables(conflicts));
    }
    shared.sort_by_key(|p| p.position(s));
    let cells = cells
        .into_iter()
        .map(|c| match c {
            Some((_, _, col)) => col.into_iter().map(Some).collect(),
            None => vec![None; d],
        })
        .collect();
    Ok(MergeOutcome {
        family: PartialFamily::new(s, d, cells)?,
        shared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, parse_rational, rat};

    fn binary(s: usize, top: &[&str]) -> PairFamily {
        PairFamily::binary(s, top.iter().map(|t| parse_rational(t).unwrap()).collect()).unwrap()
    }

    fn table_b() -> PairFamily {
        binary(4, &["0.5", "0.75", "0.25", "0.7", "0.65", "0.625"])
    }

    fn table_c() -> PairFamily {
        binary(4, &["0.5", "1", "0.6", "0.8", "0.75", "0.7"])
    }

    fn combined_map() -> RefinementMap {
        RefinementMap::new(vec![vec![1, 2, 4, 5], vec![1, 2, 3, 4]]).unwrap()
    }

    #[test]
    fn merging_b_and_c_leaves_one_gap() {
        let out = merge_tables(&[table_b(), table_c()], &combined_map()).unwrap();
        assert_eq!(
            out.family.unknown_cells(),
            vec![(PairIndex::new(3, 5), 1), (PairIndex::new(3, 5), 2)]
        );
        assert_eq!(
            out.shared,
            vec![PairIndex::new(1, 2), PairIndex::new(2, 4), PairIndex::new(1, 4)]
        );
        let top: Vec<Option<Rational>> = out.family.cells().iter().map(|c| c[0].clone()).collect();
        let expected =
            ["0.5", "1", "0.6", "0.25", "0.8", "0.75", "?", "0.7", "0.65", "0.625"].map(|t| parse_rational(t).ok());
        assert_eq!(top, expected);
    }

    #[test]
    fn completing_the_merged_table() {
        let merged = merge_tables(&[table_b(), table_c()], &combined_map()).unwrap();
        let done = complete_table(&merged.family).unwrap();
        assert_eq!(done.family.column(3, 5), [rat(1, 2), rat(1, 2)]);
        assert_eq!(done.weights.get(3, 5) * int(24), int(14));
        assert_eq!(done.weights.get(1, 3) * int(24), int(10));
        assert_eq!(done.inferred.len(), 2);
    }

    #[test]
    fn merging_with_itself_is_the_identity() {
        let out = merge_tables(&[table_b(), table_b()], &RefinementMap::identity(4, 2)).unwrap();
        assert_eq!(out.family.to_family().unwrap(), table_b());
        assert_eq!(out.shared.len(), 6);
    }

    #[test]
    fn perturbed_tables_conflict() {
        let c = binary(4, &["0.5", "1", "0.6", "0.8", "0.76", "0.7"]);
        let err = merge_tables(&[table_b(), c], &combined_map()).unwrap_err();
        let Error::IncompatibleTables(conflicts) = err else {
            panic!("expected a conflict");
        };
        assert_eq!(conflicts.len(), 1);
        assert_eq!(conflicts[0].pair, PairIndex::new(2, 4));
        assert_eq!(conflicts[0].first.1, PairIndex::new(2, 3));
        assert_eq!(conflicts[0].second.1, PairIndex::new(2, 4));
    }

    #[test]
    fn refinement_maps_are_validated() {
        assert!(RefinementMap::new(vec![vec![1, 3, 2, 5]]).is_err());
        assert!(RefinementMap::new(vec![vec![0, 3, 5]]).is_err());
        assert!(RefinementMap::new(vec![vec![1, 1, 5]]).is_err());
        assert!(RefinementMap::new(vec![vec![4]]).is_err());
        assert_eq!(RefinementMap::new(vec![vec![1, 2, 5], vec![1, 3, 4]]).unwrap().s(), 5);
        assert!(RefinementMap::new(vec![]).is_err());
        assert!(merge_tables(&[table_b()], &RefinementMap::new(vec![vec![1, 2, 5]]).unwrap()).is_err());
    }

    #[test]
    fn complete_tables_are_unchanged() {
        let pf = PartialFamily::from_family(&table_b());
        let done = complete_table(&pf).unwrap();
        assert_eq!(done.family, table_b());
        assert!(done.inferred.is_empty());
        assert_eq!(done.weights.values(), [1, 4, 1, 5, 5, 6].map(|n| rat(n, 6)));
    }

    #[test]
    fn three_outcome_table_completes() {
        let known = |t: &str| Some(parse_rational(t).unwrap());
        let cols = vec![
            vec![known("0.375"), known("0.125"), known("0.5")],
            vec![known("0.4375"), known("0.3125"), known("0.25")],
            vec![known("0.125"), known("0.125"), known("0.75")],
            vec![None, None, known("0.3")],
            vec![None, None, known("0.35")],
            vec![None, None, known("0.375")],
        ];
        let pf = PartialFamily::new(4, 3, cols).unwrap();
        let done = complete_table(&pf).unwrap();
        assert_eq!(done.family.column(1, 3), [rat(17, 40), rat(11, 40), rat(3, 10)]);
        assert_eq!(done.family.column(1, 4), [rat(3, 8), rat(1, 4), rat(3, 8)]);
        assert_eq!(done.inferred.len(), 6);
    }

    #[test]
    fn underdetermined_and_inconsistent_inputs() {
        let all_unknown = PartialFamily::new(4, 2, vec![vec![None, None]; 6]).unwrap();
        assert!(matches!(
            complete_table(&all_unknown),
            Err(Error::Underdetermined { .. })
        ));

        // only the three consecutive pairs known: nothing ties their weights together
        let mut cells = vec![vec![None, None]; 6];
        for col in cells.iter_mut().take(3) {
            *col = vec![Some(rat(1, 3)), Some(rat(2, 3))];
        }
        let pf = PartialFamily::new(4, 2, cells).unwrap();
        assert!(matches!(complete_table(&pf), Err(Error::Underdetermined { .. })));

        let a = binary(4, &["0.5", "0.8", "0.2", "0.7", "0.7", "0.6"]);
        assert!(matches!(
            complete_table(&PartialFamily::from_family(&a)),
            Err(Error::Inconsistent(_))
        ));

        let bad = PartialFamily::new(2, 2, vec![vec![Some(rat(3, 4)), Some(rat(1, 2))]]).unwrap();
        assert!(matches!(complete_table(&bad), Err(Error::NotStochastic(_))));
    }
}
