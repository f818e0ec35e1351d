//! Error types shared across the toolkit.

use thiserror::Error;

/// Errors raised by geometry, flow, ODE, spectral and jet operations.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A parameter is outside its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Vector length does not match the ambient dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A point was required to lie on a domain boundary but does not.
    #[error(
        "point is not on the boundary (defining residual {residual:.3e} exceeds {tolerance:.1e})"
    )]
    NotOnBoundary { residual: f64, tolerance: f64 },

    /// A point was required to lie inside the domain but does not.
    #[error("start point is outside the domain (defining residual {residual:.3e})")]
    OutsideDomain { residual: f64 },

    /// The gradient vanishes where a flow or frame needs it.
    #[error("critical point: gradient norm {norm:.3e} below {threshold:.1e}")]
    CriticalPoint { norm: f64, threshold: f64 },

    /// Eigenvalue clustering could not separate two clusters.
    #[error("eigenvalue clustering ambiguous: gap {gap:.3e} is between tol {tol:.1e} and 10*tol")]
    ClusterAmbiguity { gap: f64, tol: f64 },

    /// Too few samples to evaluate a discrete defect.
    #[error("trace has {got} samples; at least {need} required")]
    TooFewSamples { need: usize, got: usize },

    /// The Mobius curvature family denominator vanishes on the requested interval.
    #[error("singular curvature family: denominator {value:.3e} below 1e-10 at s = {s:.6}")]
    SingularFamily { s: f64, value: f64 },

    /// No sign change of the shooting residual inside the search bracket.
    #[error("no eigenvalue bracket in [{lo}, {hi}]: residual keeps sign {sign}")]
    BracketFailure { lo: f64, hi: f64, sign: f64 },

    /// Radicand of the graph-equation solver went negative beyond tolerance.
    #[error("phi solver inconsistent state: radicand {radicand:.3e} at phi = {phi:.6}")]
    SolverState { phi: f64, radicand: f64 },

    /// A warped-product construction failed its Robin end-point check.
    #[error("Robin residual {residual:.3e} at interval end s = {s:.6} exceeds 1e-10")]
    RobinEndpoint { s: f64, residual: f64 },

    /// Jet data violates a hypothesis (for example vanishing Neumann data).
    #[error("invalid jet data: {0}")]
    JetData(String),

    /// Two jets cannot be compared (different backends or references).
    #[error("jet representation mismatch: {0}")]
    JetMismatch(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
