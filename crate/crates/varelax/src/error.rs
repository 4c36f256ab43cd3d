//! Error types shared across the solver pipeline.

use crate::growth::Verdict;
use thiserror::Error;

/// Errors from the convex-analysis primitives.
#[derive(Debug, Error)]
pub enum ConvexError {
    /// Fewer than two finite samples; there is no epigraph to hull.
    #[error("degenerate input: need at least 2 finite samples, found {found}")]
    DegenerateInput { found: usize },
    /// No touching points of the envelope bracket the query point. Should be
    /// unreachable for envelopes produced by `convex_envelope`.
    #[error("decomposition failure at x = {point:?}: {reason}")]
    DecompositionFailure { point: Vec<f64>, reason: String },
}

/// Errors from the relaxed dual solver.
#[derive(Debug, Error)]
pub enum DualError {
    /// `c - B(s)` left the slope box of the conjugate. Either the sampling box
    /// for `f` is too small or the dual is genuinely unbounded.
    #[error("dual domain exceeded: slope {slope:?} outside conjugate box at s = {time}")]
    DualDomainExceeded { slope: Vec<f64>, time: f64 },
    /// The dual supremum is not attained within the dual domain. Carries the
    /// growth verdict, since this is the expected failure mode outside the
    /// admissible growth class.
    #[error("no minimizer: {reason} (growth verdict: {verdict})")]
    NoMinimizer { reason: String, verdict: Verdict },
    /// No selection fraction meets the endpoint constraint. Violates the
    /// bisection post-condition; unreachable in correct operation.
    #[error("infeasible selection: residual {residual} exceeds tolerance")]
    InfeasibleSelection { residual: f64 },
}

/// Errors from the chattering recovery of the original problem.
#[derive(Debug, Error)]
pub enum RecoveryError {
    /// A decomposition's represented point differs from the interval average
    /// of the relaxed velocity.
    #[error(
        "combo mismatch on [{start}, {end}]: represented {represented:?} vs average {average:?}"
    )]
    ComboMismatch {
        start: f64,
        end: f64,
        represented: Vec<f64>,
        average: Vec<f64>,
    },
    /// The recovered trajectory's cost does not certify against the relaxed
    /// cost. The run is reported, not silently accepted.
    #[error("certificate failure: cost gap {gap} exceeds tolerance {tol}")]
    CertificateFailure { gap: f64, tol: f64 },
}

/// Errors from the dynamic-programming oracle.
#[derive(Debug, Error)]
pub enum OracleError {
    /// No path on the DP grids reaches the target displacement cell.
    #[error(
        "infeasible grid: required mean velocity {required} outside velocity box [{lo}, {hi}]"
    )]
    InfeasibleGrid { required: f64, lo: f64, hi: f64 },
    /// The oracle only handles one-dimensional problems.
    #[error("oracle supports dim 1 only, got dim {0}")]
    DimensionUnsupported(usize),
}

/// Umbrella error for the end-to-end pipeline.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}
