//! Seeded generators and brute-force reference computations used by the
//! property suites and by `gen-joint`.
//!
//! Nothing here shares code with the elimination routines in
//! [`crate::matrix`]; determinants are computed by cofactor expansion and
//! ranks by searching for a nonzero minor.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior_det::{SixColumnInput, Vec2};
use crate::matrix::RationalMatrix;
use crate::par::{self, Execution};
use crate::probmodel::JointDistribution;
use crate::rational::Rational;

/// Largest matrix [`cofactor_det`] accepts.
pub const COFACTOR_LIMIT: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub s_range: RangeInclusive<usize>,
    pub d_range: RangeInclusive<usize>,
    /// Numerators are drawn from `0..=denominator_bound`.
    pub denominator_bound: u32,
}

impl GeneratorConfig {
    pub fn new(seed: u64, s_range: RangeInclusive<usize>, d_range: RangeInclusive<usize>) -> Self {
        Self {
            seed,
            s_range,
            d_range,
            denominator_bound: 12,
        }
    }

    pub fn fixed(seed: u64, s: usize, d: usize) -> Self {
        Self::new(seed, s..=s, d..=d)
    }

    pub fn with_denominator_bound(mut self, bound: u32) -> Self {
        self.denominator_bound = bound;
        self
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Integer weights indexed `[x - 2][a - 1]`; every row has a positive sum.
pub fn gen_random_counts(cfg: &GeneratorConfig) -> (usize, usize, Vec<Vec<u64>>) {
    let mut rng = cfg.rng();
    let s = rng.random_range(cfg.s_range.clone()).max(2);
    let d = rng.random_range(cfg.d_range.clone()).max(1);
    let bound = u64::from(cfg.denominator_bound.max(1));
    let counts = (2..=s)
        .map(|_| {
            let mut row: Vec<u64> = (0..d).map(|_| rng.random_range(0..=bound)).collect();
            if row.iter().all(|&c| c == 0) {
                let a = rng.random_range(0..d);
                row[a] = rng.random_range(1..=bound);
            }
            row
        })
        .collect();
    (s, d, counts)
}

/// A joint distribution with every value of `X` carrying positive mass.
pub fn gen_random_joint(cfg: &GeneratorConfig) -> JointDistribution {
    let (s, d, counts) = gen_random_counts(cfg);
    JointDistribution::from_counts(s, d, &counts).expect("generated counts have positive total")
}

/// `n / d` with `n` in `-bound..=bound` and `d` in `1..=bound`.
pub fn random_rational(rng: &mut impl Rng, bound: i64) -> Rational {
    let bound = bound.max(1);
    Rational::new(
        BigInt::from(rng.random_range(-bound..=bound)),
        BigInt::from(rng.random_range(1..=bound)),
    )
}

pub fn random_vec2(rng: &mut impl Rng, bound: i64) -> Vec2 {
    Vec2::new(random_rational(rng, bound), random_rational(rng, bound))
}

pub fn random_six_columns(rng: &mut impl Rng, bound: i64) -> SixColumnInput {
    SixColumnInput::new(std::array::from_fn(|_| random_vec2(rng, bound)))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, bound: i64) -> RationalMatrix {
    let entries = (0..rows * cols).map(|_| random_rational(rng, bound)).collect();
    RationalMatrix::new(rows, cols, entries).expect("sizes match")
}

/// Determinant by recursive Laplace expansion along the first row.
pub fn cofactor_det(m: &RationalMatrix) -> Result<Rational> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.rows() > COFACTOR_LIMIT {
        return Err(Error::TooLarge { n: m.rows() });
    }
    let rows: Vec<usize> = (0..m.rows()).collect();
    let cols: Vec<usize> = (0..m.cols()).collect();
    Ok(expand(m, &rows, &cols))
}

fn expand(m: &RationalMatrix, rows: &[usize], cols: &[usize]) -> Rational {
    match rows.len() {
        0 => Rational::from_integer(1.into()),
        1 => m.get(rows[0], cols[0]).clone(),
        _ => {
            let mut total = Rational::zero();
            for (k, &c) in cols.iter().enumerate() {
                let entry = m.get(rows[0], c);
                if entry.is_zero() {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let term = entry * expand(m, &rows[1..], &rest);
                if k % 2 == 0 {
                    total += term;
                } else {
                    total -= term;
                }
            }
            total
        }
    }
}

/// The largest `r` with a nonzero `r x r` minor.
pub fn minor_rank(m: &RationalMatrix) -> Result<usize> {
    let top = m.rows().min(m.cols());
    if top > COFACTOR_LIMIT {
        return Err(Error::TooLarge { n: top });
    }
    for r in (1..=top).rev() {
        for rows in subsets(m.rows(), r) {
            for cols in subsets(m.cols(), r) {
                if !expand(m, &rows, &cols).is_zero() {
                    return Ok(r);
                }
            }
        }
    }
    Ok(0)
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            cur.push(x);
            go(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Runs `f` once per seed; results come back in seed order.
pub fn sweep_seeds<R, F>(seeds: std::ops::Range<u64>, mode: Execution, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    let seeds: Vec<u64> = seeds.collect();
    par::map(mode, &seeds, |&seed| f(seed))
}
