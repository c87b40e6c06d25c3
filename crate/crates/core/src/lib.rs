//! # attnlab-core
//!
//! Numerical kernels for sparse attention and associative memory:
//!
//! - [`simplex`] — the α-entmax family of maps from score vectors onto the
//!   probability simplex (softmax, 1.5-entmax, sparsemax, and a bisection
//!   solver for general α), together with the Tsallis regularizer and its
//!   conjugate.
//! - [`oracle`] — a projected-gradient solver for the same variational
//!   problem, kept deliberately independent of the closed-form solvers so the
//!   two routes can cross-check each other.
//! - [`hopfield`] — dense and sparse Hopfield energies, one-step retrieval
//!   dynamics (including the extrapolated mixture `λ·T_α + (1−λ)·T_1`), and
//!   computable retrieval-error bounds.
//! - [`attention`] — dense, sparse, extrapolated, identity, and blurred
//!   attention operators plus a projection-equipped multi-head layer.
//!
//! All operations are pure functions of their inputs; nothing in this crate
//! holds shared mutable state, so everything is safe to call concurrently.

use thiserror::Error;

pub mod attention;
pub mod hopfield;
pub mod oracle;
pub mod seeding;
pub mod simplex;

pub use simplex::{AlphaParam, SimplexVector, ThresholdResult};

/// Error variants for the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// Empty input vector where at least one entry is required.
    #[error("input vector must be non-empty")]
    EmptyInput,

    /// Input contains NaN or Inf.
    #[error("{0} contains non-finite values")]
    NonFinite(&'static str),

    /// α outside the supported range.
    #[error("alpha must lie in [1, 2], got {0}")]
    InvalidAlpha(f64),

    /// Non-positive inverse temperature.
    #[error("beta must be positive and finite, got {0}")]
    InvalidBeta(f64),

    /// Non-positive temperature.
    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),

    /// Non-positive blur width.
    #[error("blur sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),

    /// Vector is not on the probability simplex within tolerance.
    #[error("vector is off the simplex (|sum - 1| = {0:e})")]
    OffSimplex(f64),

    /// Shape mismatch between operands.
    #[error("dimension mismatch: {context} ({left} vs {right})")]
    DimMismatch {
        /// What was being matched.
        context: &'static str,
        /// Left-hand dimension.
        left: usize,
        /// Right-hand dimension.
        right: usize,
    },

    /// Pattern index out of range.
    #[error("pattern index {index} out of range for {count} patterns")]
    InvalidIndex {
        /// Requested index.
        index: usize,
        /// Number of stored patterns.
        count: usize,
    },

    /// Iterative solver failed to reach its tolerance.
    #[error("solver did not converge in {iters} iterations (residual {residual:e})")]
    SolverFailure {
        /// Final mass residual |Σp − 1|.
        residual: f64,
        /// Iterations performed.
        iters: usize,
    },
}

/// Result alias for this crate.
pub type Result<T> = std::result::Result<T, Error>;
