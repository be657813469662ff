//! Error type shared across the solver and analysis layers.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// No sign change of the shooting map was found in the scan window.
    #[error("shooting bracket failure: no sign change of u(R) over alpha in [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    /// The graph became near-vertical (|u'| beyond the slope cap).
    #[error("stiff profile: |u'| exceeded {cap:e} at rho = {rho}")]
    StiffProfile { rho: f64, cap: f64 },

    /// Iteration on the shooting parameter stalled.
    #[error("shooting did not converge: |u(R)| = {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    /// Newton residual kept growing after full damping.
    #[error("Newton diverged at iteration {iteration}: residual {residual:e}")]
    NewtonDiverged { iteration: usize, residual: f64 },

    /// A pivot of the linearized system vanished.
    #[error("singular Jacobian: pivot {pivot:e} at row {row}")]
    JacobianSingular { row: usize, pivot: f64 },

    /// An intermediate continuation step failed to converge.
    #[error("continuation stalled at load factor {scale}")]
    ContinuationStalled { scale: f64 },

    /// A theorem hypothesis does not hold on this input.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// Geometric preconditions (star-shapedness, feasibility) failed.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// A mesh failed a structural validity check.
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// Recovered boundary flux left the admissible range |q| < 1.
    #[error("stiff boundary: |q| = {q} >= 1 at boundary vertex {vertex}")]
    StiffBoundary { vertex: usize, q: f64 },

    /// Malformed input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Configuration rejected by schema or range validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
