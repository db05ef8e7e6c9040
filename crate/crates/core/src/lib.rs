//! Exact `det^{S^2}` evaluation, S^2-rank audits for pair-indexed tables,
//! and the correspondence between conditional probability tables of two
//! discrete random variables and tables of S^2-rank 1.
//!
//! All arithmetic is exact over the rationals.

pub mod cli;
pub mod completion;
pub mod error;
pub mod exterior_det;
pub mod matrix;
pub mod oracle;
pub mod pairs;
pub mod par;
pub mod probmodel;
pub mod rational;
pub mod reconstruct;
pub mod s2rank;
pub mod tableio;

pub use error::{Error, Result};
pub use exterior_det::{det_s2, det_s2_companion, SixColumnInput, Vec2};
pub use matrix::RationalMatrix;
pub use pairs::{PairFamily, PairIndex};
pub use par::Execution;
pub use probmodel::{JointDistribution, WeightAssignment};
pub use rational::Rational;
