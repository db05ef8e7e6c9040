//! The converse direction: from a candidate conditional probability table
//! back to weights, distribution vectors, an explicit model of `(X, Y)` on
//! `(0,1]`, and the smallest integer population realizing the table.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::pairs::{canonical_pairs, pair_count, quadruples, triples, PairFamily, PairIndex};
use crate::par::{self, Execution};
use crate::probmodel::{DistributionVectors, JointDistribution, WeightAssignment};
use crate::rational::{lcm_of_denominators, serde_str, Rational};

/// Points `p_1 = 0, p_2, ..., p_s` with `λ_{i,j} v_{i,j} = p_j - p_i`.
pub type PointConfiguration = DistributionVectors;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripleStatus {
    UniquePositive,
    /// Nullspace of dimension 2: the three columns are parallel.
    DegenerateRank1,
    NoPositiveSolution,
    /// All three columns vanish.
    Underdetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TripleCoefficients {
    pub triple: (usize, usize, usize),
    pub status: TripleStatus,
    /// `(a, b, c)` with `b = 1`, present only for `UniquePositive`.
    #[serde(serialize_with = "serialize_coefficients")]
    pub coefficients: Option<[Rational; 3]>,
}

fn serialize_coefficients<S: serde::Serializer>(
    c: &Option<[Rational; 3]>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match c {
        Some(c) => s.collect_seq(c.iter().map(ToString::to_string)),
        None => s.serialize_none(),
    }
}

impl TripleCoefficients {
    /// `α_{i,j,k} = a / b`.
    pub fn alpha(&self) -> Option<Rational> {
        self.coefficients.as_ref().map(|[a, b, _]| a / b)
    }
}

/// Scales `v` so that its first nonzero coordinate is positive and reports
/// whether every coordinate is then strictly positive.
fn orient(mut v: Vec<Rational>) -> (Vec<Rational>, bool) {
    if v.iter().find(|x| !x.is_zero()).is_some_and(Signed::is_negative) {
        v.iter_mut().for_each(|x| *x = -x.clone());
    }
    let positive = v.iter().all(Signed::is_positive);
    (v, positive)
}

/// Every entry in `[0,1]`, every column summing to 1.
pub fn check_stochastic(fam: &PairFamily) -> bool {
    fam.is_stochastic()
}

/// Solves `a v_{i,j} - b v_{i,k} + c v_{j,k} = 0` for a positive `(a,b,c)`.
pub fn triple_coefficients(fam: &PairFamily, i: usize, j: usize, k: usize) -> Result<TripleCoefficients> {
    if !(1 <= i && i < j && j < k && k <= fam.s()) {
        return Err(Error::OutOfBounds(format!(
            "({i},{j},{k}) is not a triple of 1..={}",
            fam.s()
        )));
    }
    let neg_ik: Vec<Rational> = fam.column(i, k).iter().map(|x| -x).collect();
    let m = RationalMatrix::from_columns(&[fam.column(i, j), &neg_ik, fam.column(j, k)])?;
    let mut basis = m.nullspace();
    let (status, coefficients) = match basis.len() {
        1 => {
            let (v, positive) = orient(basis.pop().expect("one vector"));
            if positive {
                let b = v[1].clone();
                let [a, b, c] = [&v[0] / &b, Rational::one(), &v[2] / &b];
                (TripleStatus::UniquePositive, Some([a, b, c]))
            } else {
                (TripleStatus::NoPositiveSolution, None)
            }
        }
        0 => (TripleStatus::NoPositiveSolution, None),
        2 => (TripleStatus::DegenerateRank1, None),
        _ => (TripleStatus::Underdetermined, None),
    };
    Ok(TripleCoefficients {
        triple: (i, j, k),
        status,
        coefficients,
    })
}

pub fn all_triple_coefficients(fam: &PairFamily) -> Vec<TripleCoefficients> {
    triples(fam.s())
        .into_iter()
        .map(|(i, j, k)| triple_coefficients(fam, i, j, k).expect("triples are in range"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessEntry {
    pub quadruple: [usize; 4],
    pub coord: usize,
    /// Smallest partner coordinate making all four 2x3 matrices rank 2.
    pub partner: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairWitnessReport {
    pub entries: Vec<WitnessEntry>,
}

impl PairWitnessReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.partner.is_some())
    }

    pub fn failures(&self) -> impl Iterator<Item = &WitnessEntry> {
        self.entries.iter().filter(|e| e.partner.is_none())
    }
}

fn rank_two_on_all_triples(fam: &PairFamily, q: &[usize; 4], a: usize, b: usize) -> bool {
    let sub: [(usize, usize, usize); 4] = [
        (q[0], q[1], q[2]),
        (q[0], q[1], q[3]),
        (q[0], q[2], q[3]),
        (q[1], q[2], q[3]),
    ];
    sub.iter().all(|&(i1, i2, i3)| {
        let cols = [fam.column(i1, i2), fam.column(i1, i3), fam.column(i2, i3)];
        let rows = vec![
            cols.iter().map(|c| c[a - 1].clone()).collect(),
            cols.iter().map(|c| c[b - 1].clone()).collect(),
        ];
        RationalMatrix::from_rows(rows).expect("2x3").rank_exact() == 2
    })
}

/// For every quadruple and coordinate `a`, looks for a coordinate `b` such
/// that the rows `a, b` of each triple matrix inside the quadruple have
/// rank 2. With fewer than four points there is nothing to check.
pub fn check_pair_witness(fam: &PairFamily) -> PairWitnessReport {
    check_pair_witness_with(fam, Execution::default())
}

pub fn check_pair_witness_with(fam: &PairFamily, mode: Execution) -> PairWitnessReport {
    let jobs: Vec<([usize; 4], usize)> = quadruples(fam.s())
        .into_iter()
        .flat_map(|q| (1..=fam.d()).map(move |a| (q, a)))
        .collect();
    let entries = par::map(mode, &jobs, |&(quadruple, coord)| WitnessEntry {
        quadruple,
        coord,
        partner: (1..=fam.d())
            .filter(|&b| b != coord)
            .find(|&b| rank_two_on_all_triples(fam, &quadruple, coord, b)),
    });
    PairWitnessReport { entries }
}

/// The stacked cocycle relations `λ_{i,j} v_{i,j} - λ_{i,k} v_{i,k} +
/// λ_{j,k} v_{j,k} = 0` over all triples, one row per triple and
/// coordinate, unknowns in canonical pair order.
pub fn weight_system(fam: &PairFamily) -> RationalMatrix {
    let (s, d) = (fam.s(), fam.d());
    let ts = triples(s);
    let mut m = RationalMatrix::zeros(ts.len() * d, pair_count(s));
    for (t, &(i, j, k)) in ts.iter().enumerate() {
        for a in 0..d {
            let row = t * d + a;
            m.set(row, PairIndex::new(i, j).position(s), fam.column(i, j)[a].clone());
            m.set(row, PairIndex::new(i, k).position(s), -fam.column(i, k)[a].clone());
            m.set(row, PairIndex::new(j, k).position(s), fam.column(j, k)[a].clone());
        }
    }
    m
}

/// Positive weights normalized to `λ_{1,s} = 1`.
pub fn solve_weights(fam: &PairFamily) -> Result<WeightAssignment> {
    if let Some((_, why)) = fam.first_non_stochastic() {
        return Err(Error::NotStochastic(why));
    }
    let mut basis = weight_system(fam).nullspace();
    match basis.len() {
        0 => Err(Error::Inconsistent(
            "the weight system has only the zero solution".into(),
        )),
        1 => {
            let (ray, positive) = orient(basis.pop().expect("one vector"));
            if !positive {
                return Err(Error::NoPositiveRay);
            }
            Ok(WeightAssignment::new(fam.s(), ray)?.normalized())
        }
        dim => Err(Error::Underdetermined { dim }),
    }
}

/// The weights as the primitive integer vector on the same ray.
pub fn primitive_ray(w: &WeightAssignment) -> Vec<BigInt> {
    let l = lcm_of_denominators(w.values());
    let ints: Vec<BigInt> = w
        .values()
        .iter()
        .map(|v| (v * Rational::from_integer(l.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// `p_1 = 0`, `p_j = λ_{1,j} v_{1,j}`, then checks every pair.
pub fn reconstruct_points(fam: &PairFamily, w: &WeightAssignment) -> Result<PointConfiguration> {
    if w.s() != fam.s() {
        return Err(Error::DimensionMismatch(format!(
            "weights for s={}, family has s={}",
            w.s(),
            fam.s()
        )));
    }
    let scale = |c: &Rational, v: &[Rational]| -> Vec<Rational> { v.iter().map(|x| c * x).collect() };
    let mut points = vec![vec![Rational::zero(); fam.d()]];
    points.extend((2..=fam.s()).map(|j| scale(w.get(1, j), fam.column(1, j))));
    for pair in canonical_pairs(fam.s()) {
        let lhs = scale(w.at(pair), fam.column_at(pair));
        let holds = lhs
            .iter()
            .zip(points[pair.j - 1].iter().zip(&points[pair.i - 1]))
            .all(|(l, (pj, pi))| *l == pj - pi);
        if !holds {
            return Err(Error::CocycleViolation { pair });
        }
    }
    Ok(DistributionVectors { points })
}

/// `(lo, hi]` on which `X = x_label` and `Y = y_label`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    #[serde(with = "serde_str")]
    pub lo: Rational,
    #[serde(with = "serde_str")]
    pub hi: Rational,
    pub x_label: usize,
    pub y_label: usize,
}

impl Segment {
    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// A partition of `(0,1]` into labeled half-open intervals; with Lebesgue
/// measure the labels are random variables `X` and `Y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntervalModel {
    pub segments: Vec<Segment>,
}

impl IntervalModel {
    /// `P(Y = h, i < X <= j)`
    pub fn mass(&self, i: usize, j: usize, h: usize) -> Rational {
        self.segments
            .iter()
            .filter(|s| i < s.x_label && s.x_label <= j && s.y_label == h)
            .map(Segment::length)
            .sum()
    }

    /// `P(Y = h)`
    pub fn outcome_mass(&self, h: usize) -> Rational {
        self.segments
            .iter()
            .filter(|s| s.y_label == h)
            .map(Segment::length)
            .sum()
    }

    /// `P(X = x)`
    pub fn value_mass(&self, x: usize) -> Rational {
        self.segments
            .iter()
            .filter(|s| s.x_label == x)
            .map(Segment::length)
            .sum()
    }

    /// Labels `(X(t), Y(t))` for `t` in `(0,1]`.
    pub fn labels_at(&self, t: &Rational) -> Option<(usize, usize)> {
        self.segments
            .iter()
            .find(|s| s.lo < *t && *t <= s.hi)
            .map(|s| (s.x_label, s.y_label))
    }

    /// Contiguous, nonempty segments covering exactly `(0,1]`.
    pub fn is_partition_of_unit_interval(&self) -> bool {
        let mut edge = Rational::zero();
        for s in &self.segments {
            if s.lo != edge || s.hi <= s.lo {
                return false;
            }
            edge = s.hi.clone();
        }
        edge.is_one()
    }
}

/// X-blocks `(λ_{1,k-1}, λ_{1,k}]`, each split by `Y` into pieces of length
/// `p_k^h - p_{k-1}^h`. Empty pieces are dropped.
pub fn build_interval_model(w: &WeightAssignment, pts: &PointConfiguration) -> IntervalModel {
    let mut segments = Vec::new();
    let s = w.s();
    for k in 2..=s {
        let mut lo = if k == 2 {
            Rational::zero()
        } else {
            w.get(1, k - 1).clone()
        };
        for (h, len) in pts.increment(k).into_iter().enumerate() {
            if len.is_zero() {
                continue;
            }
            let hi = &lo + &len;
            segments.push(Segment {
                lo,
                hi: hi.clone(),
                x_label: k,
                y_label: h + 1,
            });
            lo = hi;
        }
    }
    IntervalModel { segments }
}

/// The smallest integer population realizing the table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PopulationTable {
    #[serde(serialize_with = "serialize_display")]
    pub total: BigInt,
    /// `counts[x - 2][a - 1]` for `x` in `2..=s`.
    #[serde(serialize_with = "serialize_count_rows")]
    pub counts: Vec<Vec<BigInt>>,
}

fn serialize_display<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn serialize_count_rows<S: serde::Serializer>(rows: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(
        rows.iter()
            .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()),
    )
}

impl PopulationTable {
    pub fn s(&self) -> usize {
        self.counts.len() + 1
    }

    pub fn d(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn count(&self, x: usize, a: usize) -> &BigInt {
        &self.counts[x - 2][a - 1]
    }

    /// Counts of `i < X <= j` per outcome, as in a cumulative column.
    pub fn pair_counts(&self, i: usize, j: usize) -> Vec<BigInt> {
        (1..=self.d())
            .map(|a| (i + 1..=j).map(|x| self.count(x, a)).sum())
            .collect()
    }

    pub fn to_joint(&self) -> Result<JointDistribution> {
        let weights = self
            .counts
            .iter()
            .map(|row| row.iter().map(|c| Rational::from_integer(c.clone())).collect())
            .collect();
        JointDistribution::from_weights(self.s(), self.d(), weights)
    }
}

/// `N` is the lcm of the denominators of the increments `p_k - p_{k-1}`;
/// counts are `N (p_k - p_{k-1})`.
pub fn minimal_population(fam: &PairFamily, w: &WeightAssignment) -> Result<PopulationTable> {
    let w = w.normalized();
    let pts = reconstruct_points(fam, &w)?;
    let increments: Vec<Vec<Rational>> = (2..=fam.s()).map(|k| pts.increment(k)).collect();
    if increments.iter().flatten().any(Signed::is_negative) {
        return Err(Error::Inconsistent("negative joint mass".into()));
    }
    let total = lcm_of_denominators(increments.iter().flatten());
    let n = Rational::from_integer(total.clone());
    let counts = increments
        .iter()
        .map(|row| row.iter().map(|v| (v * &n).to_integer()).collect())
        .collect();
    Ok(PopulationTable { total, counts })
}

/// Everything recoverable from a table satisfying the converse hypotheses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reconstruction {
    pub weights: WeightAssignment,
    pub points: PointConfiguration,
    pub population: PopulationTable,
    pub intervals: IntervalModel,
}

pub fn reconstruct(fam: &PairFamily) -> Result<Reconstruction> {
    let weights = solve_weights(fam)?;
    let points = reconstruct_points(fam, &weights)?;
    let population = minimal_population(fam, &weights)?;
    let intervals = build_interval_model(&weights, &points);
    Ok(Reconstruction {
        weights,
        points,
        population,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, parse_rational, rat};

    fn binary(top: &[&str]) -> PairFamily {
        PairFamily::binary(4, top.iter().map(|t| parse_rational(t).unwrap()).collect()).unwrap()
    }

    fn table_a() -> PairFamily {
        binary(&["0.5", "0.8", "0.2", "0.7", "0.7", "0.6"])
    }

    fn table_b() -> PairFamily {
        binary(&["0.5", "0.75", "0.25", "0.7", "0.65", "0.625"])
    }

    fn table_c() -> PairFamily {
        binary(&["0.5", "1", "0.6", "0.8", "0.75", "0.7"])
    }

    #[test]
    fn stochastic_checks() {
        assert!(check_stochastic(&table_a()));
        assert!(check_stochastic(&table_b()));
        let mut cols = table_b().columns().to_vec();
        cols[2] = vec![rat(1, 2), rat(2, 5)];
        assert!(!check_stochastic(&PairFamily::new(4, 2, cols).unwrap()));
    }

    #[test]
    fn triple_coefficients_of_first_table() {
        let t = triple_coefficients(&table_a(), 1, 2, 3).unwrap();
        assert_eq!(t.status, TripleStatus::UniquePositive);
        assert_eq!(t.coefficients, Some([rat(1, 3), int(1), rat(2, 3)]));
        assert_eq!(t.alpha(), Some(rat(1, 3)));
        assert_eq!(
            triple_coefficients(&table_a(), 2, 3, 4).unwrap().alpha(),
            Some(rat(5, 6))
        );
    }

    #[test]
    fn degenerate_triples() {
        let flat = PairFamily::from_fn(4, 2, |_| vec![rat(1, 3), rat(2, 3)]).unwrap();
        let t = triple_coefficients(&flat, 1, 2, 3).unwrap();
        assert_eq!(t.status, TripleStatus::DegenerateRank1);
        assert_eq!(t.alpha(), None);

        let zero = PairFamily::from_fn(4, 2, |_| vec![int(0), int(0)]).unwrap();
        assert_eq!(
            triple_coefficients(&zero, 1, 2, 3).unwrap().status,
            TripleStatus::Underdetermined
        );

        // v12 = e1, v23 = e2, v13 = -e1: solutions are multiples of (1,-1,0)
        let fam = PairFamily::new(
            3,
            2,
            vec![vec![int(1), int(0)], vec![int(0), int(1)], vec![int(-1), int(0)]],
        )
        .unwrap();
        assert_eq!(
            triple_coefficients(&fam, 1, 2, 3).unwrap().status,
            TripleStatus::NoPositiveSolution
        );

        assert!(triple_coefficients(&table_b(), 1, 3, 2).is_err());
    }

    #[test]
    fn pair_witnesses() {
        let rb = check_pair_witness(&table_b());
        assert!(rb.holds());
        assert_eq!(rb.entries[0].partner, Some(2));
        assert!(check_pair_witness(&table_c()).holds());
        let flat = PairFamily::from_fn(5, 3, |_| vec![rat(1, 3), rat(1, 3), rat(1, 3)]).unwrap();
        let r = check_pair_witness(&flat);
        assert_eq!(r.failures().count(), 5 * 3);
    }

    #[test]
    fn weights_of_example_tables() {
        let wb = solve_weights(&table_b()).unwrap();
        assert_eq!(wb.values(), [1, 4, 1, 5, 5, 6].map(|n| rat(n, 6)));
        assert_eq!(primitive_ray(&wb), [1, 4, 1, 5, 5, 6].map(BigInt::from));
        let wc = solve_weights(&table_c()).unwrap();
        assert_eq!(primitive_ray(&wc), [2, 3, 5, 5, 8, 10].map(BigInt::from));
        assert!(wc.is_additive());
    }

    #[test]
    fn first_table_has_no_weights() {
        assert!(matches!(
            solve_weights(&table_a()),
            Err(Error::Inconsistent(_) | Error::NoPositiveRay)
        ));
    }

    #[test]
    fn weight_failures() {
        let flat = PairFamily::from_fn(4, 2, |_| vec![rat(1, 2), rat(1, 2)]).unwrap();
        assert!(matches!(solve_weights(&flat), Err(Error::Underdetermined { dim: 3 })));
        let mut cols = table_b().columns().to_vec();
        cols[0] = vec![rat(1, 2), rat(1, 3)];
        assert!(matches!(
            solve_weights(&PairFamily::new(4, 2, cols).unwrap()),
            Err(Error::NotStochastic(_))
        ));
        let two = PairFamily::binary(2, vec![rat(1, 3)]).unwrap();
        assert_eq!(solve_weights(&two).unwrap().values(), [int(1)]);
    }

    #[test]
    fn points_of_second_table() {
        let w = solve_weights(&table_b()).unwrap();
        let p = reconstruct_points(&table_b(), &w).unwrap();
        let expected = [[0, 0], [2, 2], [14, 6], [15, 9]];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(p.points[k], vec![rat(e[0], 24), rat(e[1], 24)]);
        }
        let wc = solve_weights(&table_c()).unwrap();
        let pc = reconstruct_points(&table_c(), &wc).unwrap();
        assert_eq!(pc.point(4), [rat(7, 10), rat(3, 10)]);
    }

    #[test]
    fn wrong_weights_break_the_cocycle() {
        let w = WeightAssignment::new(4, [1, 4, 1, 5, 5, 7].map(|n| rat(n, 6)).to_vec()).unwrap();
        assert!(matches!(
            reconstruct_points(&table_b(), &w),
            Err(Error::CocycleViolation { .. })
        ));
    }

    #[test]
    fn interval_model_of_second_table() {
        let w = solve_weights(&table_b()).unwrap();
        let p = reconstruct_points(&table_b(), &w).unwrap();
        let model = build_interval_model(&w, &p);
        assert_eq!(model.segments.len(), 6);
        assert!(model.is_partition_of_unit_interval());
        for k in 2..=4 {
            let lo = if k == 2 { int(0) } else { w.get(1, k - 1).clone() };
            assert_eq!(model.value_mass(k), w.get(1, k) - lo);
        }
        assert_eq!(model.outcome_mass(1), rat(5, 8));
        assert_eq!(model.outcome_mass(2), rat(3, 8));
        assert_eq!(model.labels_at(&rat(1, 24)), Some((2, 1)));
        assert_eq!(model.labels_at(&rat(1, 1)), Some((4, 2)));
        assert_eq!(model.labels_at(&int(0)), None);
    }

    #[test]
    fn interval_model_for_two_points() {
        let fam = PairFamily::new(2, 3, vec![vec![rat(1, 2), rat(1, 3), rat(1, 6)]]).unwrap();
        let r = reconstruct(&fam).unwrap();
        let lens: Vec<Rational> = r.intervals.segments.iter().map(Segment::length).collect();
        assert_eq!(lens, [rat(1, 2), rat(1, 3), rat(1, 6)]);
        assert_eq!(r.population.total, BigInt::from(6));
    }

    #[test]
    fn zero_increments_are_dropped() {
        let r = reconstruct(&table_c()).unwrap();
        assert_eq!(r.intervals.segments.len(), 5);
        assert!(r.intervals.is_partition_of_unit_interval());
    }

    #[test]
    fn minimal_populations() {
        let wb = solve_weights(&table_b()).unwrap();
        let pb = minimal_population(&table_b(), &wb).unwrap();
        assert_eq!(pb.total, BigInt::from(24));
        assert_eq!(pb.count(3, 1), &BigInt::from(12));
        assert_eq!(pb.pair_counts(1, 3), [14, 6].map(BigInt::from));

        let wc = solve_weights(&table_c()).unwrap();
        let pc = minimal_population(&table_c(), &wc).unwrap();
        assert_eq!(pc.total, BigInt::from(10));
        assert_eq!(pc.count(3, 2), &BigInt::zero());

        // unnormalized weights give the same population
        let pb2 = minimal_population(&table_b(), &wb.scaled(&int(4))).unwrap();
        assert_eq!(pb2, pb);
    }
}
