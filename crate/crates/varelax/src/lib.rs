//! Solver for non-coercive, non-convex one-dimensional variational problems
//!
//! Minimizes `∫₀ᵀ [a(t)·u(t) + f(u′(t))] dt` over absolutely continuous
//! `u: [0,T] → ℝᵐ` with fixed endpoints `u(0) = u₀`, `u(T) = u₁`, for
//! integrands `f` that are neither convex nor coercive. The constructive
//! route:
//!
//! 1. convexify the sampled integrand (lower hull of the epigraph),
//! 2. check the growth of `f**(x) - x·∇f**(x)` toward the box boundary,
//! 3. solve the relaxed problem by concave dual maximization over the
//!    multiplier of the isoperimetric constraint `∫ u′ = u₁ - u₀`,
//! 4. repair the relaxed velocity on the set where `f** < f` by chattering
//!    among touching points of the envelope, preserving endpoints and cost,
//! 5. certify the result against the dual lower bound and, in tests, against
//!    a brute-force dynamic-programming oracle.
//!
//! The full pipeline is exact-by-construction on piecewise-affine data for
//! one-dimensional derivatives; two-dimensional problems get envelope,
//! conjugate, subdifferential and growth machinery plus a supergradient
//! ascent dual path.

pub mod convex;
pub mod dual;
pub mod error;
pub mod expr;
pub mod grid;
pub mod growth;
pub mod oracle;
pub mod pipeline;
pub mod problem;
pub mod recovery;

pub use convex::{
    caratheodory_decompose, convex_envelope, legendre_conjugate, subdifferential,
    CaratheodoryCombo, ConvexPiecewise, Face,
};
pub use error::{ConvexError, DualError, OracleError, RecoveryError, SolveError};
pub use grid::{Axis, SampledFunction};
pub use growth::{classify_class_f, growth_profile, GrowthProfile, Verdict};
pub use pipeline::{solve, SolveOptions, SolveOutput};
pub use problem::{accumulate, AccumulatedTerm, LinearTerm, ProblemSpec};
pub use recovery::{SolveReport, Trajectory};
