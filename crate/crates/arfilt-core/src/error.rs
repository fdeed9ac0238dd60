//! Crate-wide error type.
//!
//! Every fallible routine returns [`Result`]. Variants are deliberately
//! coarse: they identify *what went wrong* (divergence, domain violation,
//! infeasible data, ...) and carry the few numbers needed to report it, not
//! the full call context.

use std::fmt;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An iteration failed to reach the requested tolerance within its
    /// iteration budget.
    NonConvergent { what: &'static str, iterations: usize },
    /// An argument lies outside the mathematical domain of the routine.
    Domain { what: &'static str, detail: String },
    /// The slope is too large for the polynomial to be stable: stability of
    /// `p0 + p1*(z1+...+zd)` requires `d*|p1/p0| < 1`.
    UnstableInput { dim: usize, modulus: f64 },
    /// A sampled value was NaN or infinite.
    NonFinite { what: &'static str },
    /// A matrix that must be inverted was numerically singular.
    SingularMatrix { what: &'static str },
    /// The requested computation exceeds a hard size budget.
    ResourceLimit { what: &'static str, requested: usize, limit: usize },
    /// The root scan found no sign change for the defining equation of `c`.
    NoBracket { scanned: usize },
    /// The prescribed data `(a, b)` admits no stable reconstruction:
    /// feasibility requires `|b| < (1 - 1/gamma_d) * a`.
    Infeasible { modulus: f64, threshold: f64 },
    /// The assembled moment matrix is not positive definite.
    NotPositiveDefinite { margin: f64 },
    /// A linear solve hit a zero (or negligible) pivot.
    SingularSystem { what: &'static str },
    /// A coefficient index was requested that the recurrence cannot reach
    /// from the seed values.
    Underdetermined { index: [i64; 3] },
    /// Arguments that are structurally invalid (wrong dimension, empty
    /// index list, ...), as opposed to out-of-domain numbers.
    InvalidInput { what: String },
    /// An internal consistency check failed; indicates a bug.
    Internal { what: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonConvergent { what, iterations } => {
                write!(f, "{what}: no convergence after {iterations} iterations")
            }
            Error::Domain { what, detail } => write!(f, "{what}: domain error: {detail}"),
            Error::UnstableInput { dim, modulus } => write!(
                f,
                "unstable slope: d*|s| = {}*{modulus} >= 1, polynomial has zeros on or inside the torus",
                dim
            ),
            Error::NonFinite { what } => write!(f, "{what}: non-finite value encountered"),
            Error::SingularMatrix { what } => write!(f, "{what}: singular matrix"),
            Error::ResourceLimit { what, requested, limit } => {
                write!(f, "{what}: requested size {requested} exceeds limit {limit}")
            }
            Error::NoBracket { scanned } => {
                write!(f, "no sign change bracketing a root (scanned {scanned} points)")
            }
            Error::Infeasible { modulus, threshold } => write!(
                f,
                "infeasible data: |b| = {modulus} is not below the feasibility threshold {threshold}"
            ),
            Error::NotPositiveDefinite { margin } => {
                write!(f, "moment matrix is not positive definite (margin {margin:e})")
            }
            Error::SingularSystem { what } => write!(f, "{what}: singular linear system"),
            Error::Underdetermined { index } => write!(
                f,
                "coefficient at index ({}, {}, {}) is not determined by the recurrence from the seed values",
                index[0], index[1], index[2]
            ),
            Error::InvalidInput { what } => write!(f, "invalid input: {what}"),
            Error::Internal { what } => write!(f, "internal error: {what}"),
        }
    }
}

impl std::error::Error for Error {}
