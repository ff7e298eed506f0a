//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::manifold::ManifoldKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two objects living on different manifolds were combined.
    #[error("manifold kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: ManifoldKind,
        found: ManifoldKind,
    },

    /// A tangent vector was used at a point other than its base.
    #[error("tangent vector is based at a different point than the one supplied")]
    BaseMismatch,

    /// Coordinates do not satisfy the manifold constraint or have the wrong length.
    #[error("invalid point for {kind}: {reason}")]
    InvalidPoint { kind: ManifoldKind, reason: String },

    #[error("invalid tangent vector for {kind}: {reason}")]
    InvalidTangent { kind: ManifoldKind, reason: String },

    /// The pair lies on (or numerically too close to) each other's cut locus.
    #[error("points are in each other's cut locus (distance {distance:.6}): x = {x:?}, y = {y:?}")]
    CutLocus {
        x: Vec<f64>,
        y: Vec<f64>,
        distance: f64,
    },

    /// Operation undefined for the supplied configuration.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Integration produced non-finite values.
    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    /// A vector field handle refused to evaluate.
    #[error("field evaluation failed at t = {time}: {reason}")]
    FieldEvaluation { time: f64, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The chosen horizon makes K' = 1 - K e^{-lambda delta} non-positive.
    #[error("invalid horizon: K' = {k_prime} is not positive (K = {k}, lambda = {lambda}, delta = {delta})")]
    InvalidDelta {
        k: f64,
        lambda: f64,
        delta: f64,
        k_prime: f64,
    },

    /// The truncated infinite-horizon integral cannot be certified.
    #[error("tail bound {tail:.3e} exceeds {limit:.3e} for horizon {horizon}")]
    Horizon { tail: f64, limit: f64, horizon: f64 },

    /// Trajectory data does not support the requested stability class.
    #[error("classification failed ({reason}); candidate class {candidate}")]
    Classification {
        reason: String,
        candidate: crate::certifier::StabilityClass,
    },

    /// An input generator produced a value beyond its declared bound.
    #[error("input contract violated at t = {time}: |u| = {norm} > declared bound {bound}")]
    InputContract { time: f64, norm: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
