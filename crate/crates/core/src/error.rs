use thiserror::Error;

use crate::spin_algebra::HalfInteger;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spin magnitude must be non-negative, got {0}")]
    NegativeSpin(HalfInteger),

    #[error("projection {m} is not allowed for spin {j}")]
    InvalidProjection { j: HalfInteger, m: HalfInteger },

    #[error("cannot parse half-integer from {0:?}")]
    ParseHalfInteger(String),

    #[error("cannot parse level label from {0:?}")]
    ParseLevel(String),

    #[error("nuclear spin must be at least 1/2, got {0}")]
    InvalidNuclearSpin(HalfInteger),

    #[error("electron and nuclear couplings must differ (a' = b' = {0})")]
    EqualCouplings(f64),

    #[error("coupling constants must be finite")]
    NonFiniteCoupling,

    #[error("closed form requires nuclear spin {expected}, atom has {actual}")]
    ClosedFormUnavailable {
        expected: HalfInteger,
        actual: HalfInteger,
    },

    #[error("unknown atom preset {0:?}")]
    UnknownPreset(String),

    #[error("matrix must be square and symmetric (dimension {rows}x{cols})")]
    NotSymmetric { rows: usize, cols: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("state norm {norm} deviates from 1")]
    NotNormalized { norm: f64 },

    #[error("state has dimension {actual}, basis has {expected}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(
        "ambiguous level continuation at grid point {index} ({parameter} = {value}): overlaps {first} and {second}"
    )]
    AmbiguousContinuation {
        index: usize,
        parameter: &'static str,
        value: f64,
        first: f64,
        second: f64,
    },

    #[error("level {0} does not exist for this atom")]
    UnknownLevel(String),

    #[error("levels {a} and {b} share a block; use the avoided-crossing search")]
    SameBlockPair { a: String, b: String },

    #[error("block m = {m} has dimension {dim}, expected 2")]
    NotTwoLevelBlock { m: HalfInteger, dim: usize },

    #[error("Schmidt vector has no sharp magnetic quantum number")]
    NoSharpProjection,

    #[error("tracked level {level} is degenerate on the loop at phi = {phi} (gap {gap:e})")]
    DegenerateOnLoop { level: String, phi: f64, gap: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("invalid preset table: {0}")]
    Presets(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
