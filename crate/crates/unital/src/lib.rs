//! Convex structure of unital quantum channels.
//!
//! A channel T(rho) = sum_i A_i rho A_i^dag is unital when T(1) = 1. Classically
//! (Birkhoff) every doubly stochastic matrix is a mixture of permutations; the
//! quantum analogue fails, and this crate implements the machinery around that
//! failure: channel representations and the two constructive decompositions that
//! survive (two Hilbert-Schmidt unitaries, affine combinations of unitary
//! conjugations), extremality tests, flip-ansatz separation witnesses with tight
//! constants, the closed-form negativity for orthogonally covariant channels in
//! odd dimension, two constructions that restore the Birkhoff property for
//! tensor-product copies, and the unitary-manifold optimizer that cross-checks
//! every closed form numerically.
//!
//! All matrices are dense complex doubles ([`linalg::CMatrix`]); everything is a
//! pure function of its inputs and an explicit seed.

pub mod birkhoff;
pub mod channel;
pub mod covariant;
pub mod extremal;
pub mod linalg;
pub mod optimize;
pub mod witness;

/// Default tolerance for predicate checks; every predicate also has a
/// `*_with_tol` form. All matrices handled here are at most 81x81, so double
/// precision leaves ample headroom under 1e-9.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("entry arrays have wrong length: expected {expected}, got {got}")]
    EntryLength { expected: usize, got: usize },
    #[error("matrix is not {property} (defect {defect:.3e} exceeds tol {tol:.1e})")]
    MatrixProperty {
        property: &'static str,
        defect: f64,
        tol: f64,
    },
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("values must be sorted non-increasing")]
    Unsorted,
    #[error("spanning family still rank-deficient after {retries} retries")]
    RankDeficient { retries: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
