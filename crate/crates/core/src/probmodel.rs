//! From a joint distribution of `(X, Y)` to its conditional probability
//! matrix, distribution vectors and distribution weights.
//!
//! `X` takes values in `{2..s}` (never 1) and `Y` in `{1..d}`. For pairs
//! `i < j`:
//!
//! * `v_{i,j}^a = P(Y=a | i < X <= j)`
//! * `p_i^a = P(Y=a, X <= i)`
//! * `λ_{i,j} = P(i < X <= j)`
//!
//! so that `λ_{i,j} v_{i,j} = p_j - p_i`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::pairs::{canonical_pairs, pair_count, triples, PairFamily, PairIndex};
use crate::rational::{in_unit_interval, serde_str, Rational};
use crate::s2rank::{s2_rank_is_one, S2RankVerdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointDistribution {
    s: usize,
    d: usize,
    /// `mass[x - 2][a - 1] = P(X = x, Y = a)`
    mass: Vec<Vec<Rational>>,
}

impl JointDistribution {
    /// Probabilities indexed `[x - 2][a - 1]`; must be nonnegative and sum to 1.
    pub fn from_probabilities(s: usize, d: usize, mass: Vec<Vec<Rational>>) -> Result<Self> {
        Self::check_shape(s, d, &mass)?;
        if mass.iter().flatten().any(Signed::is_negative) {
            return Err(Error::InvalidJoint("negative probability".into()));
        }
        let total: Rational = mass.iter().flatten().sum();
        if !total.is_one() {
            return Err(Error::InvalidJoint(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { s, d, mass })
    }

    /// Nonnegative weights of any positive total, normalized to probabilities.
    pub fn from_weights(s: usize, d: usize, weights: Vec<Vec<Rational>>) -> Result<Self> {
        Self::check_shape(s, d, &weights)?;
        if weights.iter().flatten().any(Signed::is_negative) {
            return Err(Error::InvalidJoint("negative weight".into()));
        }
        let total: Rational = weights.iter().flatten().sum();
        if total.is_zero() {
            return Err(Error::InvalidJoint("total mass is zero".into()));
        }
        let mass = weights
            .into_iter()
            .map(|row| row.into_iter().map(|w| w / &total).collect())
            .collect();
        Ok(Self { s, d, mass })
    }

    /// Integer counts indexed `[x - 2][a - 1]`.
    pub fn from_counts(s: usize, d: usize, counts: &[Vec<u64>]) -> Result<Self> {
        let weights = counts
            .iter()
            .map(|row| row.iter().map(|&c| Rational::from_integer(BigInt::from(c))).collect())
            .collect();
        Self::from_weights(s, d, weights)
    }

    fn check_shape(s: usize, d: usize, mass: &[Vec<Rational>]) -> Result<()> {
        if s < 2 || d < 1 {
            return Err(Error::InvalidJoint(format!("need s >= 2 and d >= 1, got s={s}, d={d}")));
        }
        if mass.len() != s - 1 || mass.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidJoint(format!(
                "expected {} rows (X = 2..{s}) of {d} entries",
                s - 1
            )));
        }
        Ok(())
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `P(X = x, Y = a)` for `x` in `2..=s`, `a` in `1..=d`.
    pub fn mass(&self, x: usize, a: usize) -> &Rational {
        &self.mass[x - 2][a - 1]
    }

    pub fn masses(&self) -> &[Vec<Rational>] {
        &self.mass
    }

    /// `P(Y = a, i < X <= j)`
    pub fn pair_outcome_mass(&self, i: usize, j: usize, a: usize) -> Rational {
        (i + 1..=j).map(|x| self.mass(x, a)).sum()
    }

    /// `P(i < X <= j)`
    pub fn pair_mass(&self, i: usize, j: usize) -> Rational {
        (1..=self.d).map(|a| self.pair_outcome_mass(i, j, a)).sum()
    }

    /// Every `P(i < X <= j)` is positive, i.e. every value of `X` has mass.
    pub fn check_pair_masses(&self) -> Result<()> {
        match (2..=self.s).find(|&x| self.mass[x - 2].iter().all(Zero::is_zero)) {
            Some(x) => Err(Error::ZeroPairMass { i: x - 1, j: x }),
            None => Ok(()),
        }
    }

    /// The `(s-1) x d` matrix of `P(X = x, Y = a)`.
    pub fn joint_matrix(&self) -> RationalMatrix {
        RationalMatrix::from_rows(self.mass.clone()).expect("rectangular")
    }

    /// `X` and `Y` are independent iff the joint matrix has rank 1.
    pub fn is_independent(&self) -> bool {
        self.joint_matrix().rank_exact() == 1
    }
}

/// The points `p_1, ..., p_s` of `Q^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistributionVectors {
    #[serde(serialize_with = "serialize_points")]
    pub points: Vec<Vec<Rational>>,
}

fn serialize_points<S: serde::Serializer>(p: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(p.len()))?;
    for v in p {
        seq.serialize_element(&v.iter().map(ToString::to_string).collect::<Vec<_>>())?;
    }
    seq.end()
}

impl DistributionVectors {
    /// `p_i`, 1-based.
    pub fn point(&self, i: usize) -> &[Rational] {
        &self.points[i - 1]
    }

    /// `p_k - p_{k-1}` for `k >= 2`.
    pub fn increment(&self, k: usize) -> Vec<Rational> {
        self.point(k)
            .iter()
            .zip(self.point(k - 1))
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Positive weights `λ_{i,j}` on all pairs, canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightAssignment {
    s: usize,
    #[serde(with = "serde_str::vec")]
    values: Vec<Rational>,
}

impl WeightAssignment {
    pub fn new(s: usize, values: Vec<Rational>) -> Result<Self> {
        if values.len() != pair_count(s) {
            return Err(Error::DimensionMismatch(format!(
                "s={s} needs {} weights, got {}",
                pair_count(s),
                values.len()
            )));
        }
        Ok(Self { s, values })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.values[PairIndex::new(i, j).position(self.s)]
    }

    pub fn at(&self, p: PairIndex) -> &Rational {
        &self.values[p.position(self.s)]
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self {
            s: self.s,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Rescaled so that `λ_{1,s} = 1`.
    pub fn normalized(&self) -> Self {
        let top = self.get(1, self.s).clone();
        self.scaled(&top.recip())
    }

    pub fn all_positive(&self) -> bool {
        self.values.iter().all(Signed::is_positive)
    }

    /// `λ_{i,k} = λ_{i,j} + λ_{j,k}` for all `i < j < k`.
    pub fn is_additive(&self) -> bool {
        triples(self.s)
            .into_iter()
            .all(|(i, j, k)| *self.get(i, k) == self.get(i, j) + self.get(j, k))
    }
}

pub fn conditional_matrix(joint: &JointDistribution) -> Result<PairFamily> {
    joint.check_pair_masses()?;
    PairFamily::from_fn(joint.s, joint.d, |p| {
        let total = joint.pair_mass(p.i, p.j);
        (1..=joint.d)
            .map(|a| joint.pair_outcome_mass(p.i, p.j, a) / &total)
            .collect()
    })
}

pub fn distribution_vectors(joint: &JointDistribution) -> DistributionVectors {
    let mut points = vec![vec![Rational::zero(); joint.d]];
    for x in 2..=joint.s {
        let next = points[x - 2]
            .iter()
            .zip(&joint.mass[x - 2])
            .map(|(p, m)| p + m)
            .collect();
        points.push(next);
    }
    DistributionVectors { points }
}

pub fn weights(joint: &JointDistribution) -> WeightAssignment {
    let p = distribution_vectors(joint);
    let values = canonical_pairs(joint.s)
        .into_iter()
        .map(|pair| {
            p.point(pair.j)
                .iter()
                .zip(p.point(pair.i))
                .map(|(hi, lo)| hi - lo)
                .sum()
        })
        .collect();
    WeightAssignment { s: joint.s, values }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairCheck {
    pub pair: PairIndex,
    #[serde(with = "serde_str")]
    pub weight: Rational,
    /// `λ ∈ (0,1]`
    pub weight_in_range: bool,
    /// entries in `[0,1]` summing to 1
    pub stochastic: bool,
    /// `λ_{i,j} v_{i,j} = p_j - p_i`
    pub identity_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TripleCheck {
    pub triple: (usize, usize, usize),
    #[serde(with = "serde_str")]
    pub alpha: Rational,
    /// `α ∈ (0,1)`
    pub alpha_in_range: bool,
    /// `v_{i,k} = α v_{i,j} + (1 - α) v_{j,k}`
    pub convex_identity_holds: bool,
    /// `λ_{i,j} v_{i,j} - λ_{i,k} v_{i,k} + λ_{j,k} v_{j,k} = 0`
    pub cocycle_holds: bool,
    /// `λ_{i,k} = λ_{i,j} + λ_{j,k}`
    pub additivity_holds: bool,
}

impl TripleCheck {
    pub fn passed(&self) -> bool {
        self.alpha_in_range && self.convex_identity_holds && self.cocycle_holds && self.additivity_holds
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum RankCheck {
    Checked(S2RankVerdict),
    /// `s < 4` or `d < 2`: there are no 2-minors.
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub pairs: Vec<PairCheck>,
    pub triples: Vec<TripleCheck>,
    pub s2_rank: RankCheck,
}

impl IdentityReport {
    pub fn pairs_pass(&self) -> bool {
        self.pairs
            .iter()
            .all(|p| p.weight_in_range && p.stochastic && p.identity_holds)
    }

    pub fn triples_pass(&self) -> bool {
        self.triples.iter().all(TripleCheck::passed)
    }

    /// Vacuous rank checks count as passing.
    pub fn rank_passes(&self) -> bool {
        match &self.s2_rank {
            RankCheck::Checked(v) => v.rank_one,
            RankCheck::Vacuous => true,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.pairs_pass() && self.triples_pass() && self.rank_passes()
    }
}

fn combination(terms: &[(&Rational, &[Rational])]) -> Vec<Rational> {
    let d = terms[0].1.len();
    (0..d).map(|a| terms.iter().map(|(c, v)| *c * &v[a]).sum()).collect()
}

/// Checks the three statements linking `v`, `p` and `λ` for one joint.
pub fn verify_joint_identities(joint: &JointDistribution) -> Result<IdentityReport> {
    let fam = conditional_matrix(joint)?;
    let p = distribution_vectors(joint);
    let w = weights(joint);

    let pairs = fam
        .pairs()
        .into_iter()
        .map(|pair| {
            let v = fam.column_at(pair);
            let lambda = w.at(pair).clone();
            let lhs: Vec<Rational> = v.iter().map(|x| x * &lambda).collect();
            let rhs: Vec<Rational> = p
                .point(pair.j)
                .iter()
                .zip(p.point(pair.i))
                .map(|(a, b)| a - b)
                .collect();
            let sum: Rational = v.iter().sum();
            PairCheck {
                pair,
                weight_in_range: lambda.is_positive() && lambda <= Rational::one(),
                weight: lambda,
                stochastic: v.iter().all(in_unit_interval) && sum.is_one(),
                identity_holds: lhs == rhs,
            }
        })
        .collect();

    let one = Rational::one();
    let triples = triples(fam.s())
        .into_iter()
        .map(|(i, j, k)| {
            let (vij, vik, vjk) = (fam.column(i, j), fam.column(i, k), fam.column(j, k));
            let (lij, lik, ljk) = (w.get(i, j), w.get(i, k), w.get(j, k));
            let alpha = lij / lik;
            let convex = combination(&[(&alpha, vij), (&(&one - &alpha), vjk)]);
            let neg_lik = -lik;
            let cocycle = combination(&[(lij, vij), (&neg_lik, vik), (ljk, vjk)]);
            TripleCheck {
                triple: (i, j, k),
                alpha_in_range: alpha.is_positive() && alpha < one,
                convex_identity_holds: convex == vik,
                cocycle_holds: cocycle.iter().all(Zero::is_zero),
                additivity_holds: *lik == lij + ljk,
                alpha,
            }
        })
        .collect();

    let s2_rank = match s2_rank_is_one(&fam) {
        Ok(v) => RankCheck::Checked(v),
        Err(Error::TooSmall { .. }) => RankCheck::Vacuous,
        Err(e) => return Err(e),
    };

    Ok(IdentityReport {
        pairs,
        triples,
        s2_rank,
    })
}
