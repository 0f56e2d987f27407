//! Permutation pattern laboratory.
//!
//! Occurrence counting and exhaustive enumeration of `S_{n,r}(q)` (the
//! permutations of length `n` with exactly `r` occurrences of `q`), the
//! constructive injections that bound `|S_{n,r}(q)|` by `n^r |S_n(q)|`, and
//! exact tooling around them: closed forms, generating-function expansion,
//! ratio tables and effective Wilf classes.

pub mod analysis;
pub mod decomp;
pub mod enumeration;
pub mod error;
pub mod injections;
pub mod matcher;
pub mod perm;
pub mod scalar;
pub mod serde_util;
pub mod table;

pub use decomp::{check_hypotheses, HypothesisReport};
pub use enumeration::EnumConfig;
pub use error::{Error, ProofGapError, Result};
pub use perm::{Permutation, Symmetry};
pub use scalar::Scalar;

/// Exact counts.
pub type Count = num_bigint::BigUint;
/// Exact rationals used for ratios and series coefficients.
pub type Rational = num_rational::BigRational;
/// Exact power series.
pub type RationalSeries = analysis::series::PowerSeries<Rational>;
/// Floating-point power series for quick approximate work.
pub type FloatSeries = analysis::series::PowerSeries<f64>;
