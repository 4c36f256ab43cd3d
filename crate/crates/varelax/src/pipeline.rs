//! End-to-end solve: envelope → growth check → relaxed dual solve →
//! chattering recovery → certificate.

use crate::convex::{
    caratheodory_decompose, convex_envelope, legendre_conjugate, CaratheodoryCombo, ConvexPiecewise,
};
use crate::dual::{DualProblem, DualProblem2, RelaxedSolution};
use crate::error::SolveError;
use crate::growth::{
    classify_class_f, default_shells, default_threshold, growth_profile, GrowthProfile,
};
use crate::problem::{accumulate, AccumulatedTerm, ProblemSpec};
use crate::recovery::{
    assemble, chatter, detachment_set, relaxed_trajectory, DetachmentInterval, PartitionScheme,
    SolveReport, Trajectory,
};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Quadrature nodes for the accumulated term and the selection grid.
    pub nodes: usize,
    /// Chattering pieces per detachment interval (floor; pieces are refined
    /// further when the linear term varies across a detachment interval).
    pub n_chatter: usize,
    /// Base tolerance for quadrature-level comparisons.
    pub tol: f64,
    /// Shell radii for the growth check; `None` picks four equal bands.
    pub shells: Option<Vec<f64>>,
    /// Growth threshold; `None` picks the scale-aware default.
    pub threshold: Option<f64>,
    pub min_decrease_shells: usize,
    /// Stop after the relaxed solve.
    pub relaxed_only: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            nodes: 1001,
            n_chatter: 16,
            tol: 1e-6,
            shells: None,
            threshold: None,
            min_decrease_shells: 3,
            relaxed_only: false,
        }
    }
}

/// Everything a caller may want to inspect or emit after a solve.
#[derive(Debug)]
pub struct SolveOutput {
    pub envelope: ConvexPiecewise,
    pub conjugate: ConvexPiecewise,
    pub profile: GrowthProfile,
    pub accumulated: AccumulatedTerm,
    pub relaxed: RelaxedSolution,
    pub relaxed_traj: Trajectory,
    pub trajectory: Trajectory,
    pub detachments: Vec<DetachmentInterval>,
    pub report: SolveReport,
}

/// Runs the constructive pipeline on a problem instance.
///
/// `NoMinimizer` is returned (with the growth verdict attached) when the
/// dual supremum is not attained within the dual domain — the expected
/// failure mode for integrands outside the growth class. A failed
/// certificate is not an error here: the report carries `is_minimizer` and
/// `check_certificate` makes it hard.
pub fn solve(spec: &ProblemSpec, opts: &SolveOptions) -> Result<SolveOutput, SolveError> {
    let envelope = convex_envelope(&spec.f)?;
    let conjugate = legendre_conjugate(&envelope)?;

    let shells = opts
        .shells
        .clone()
        .unwrap_or_else(|| default_shells(&envelope));
    let mut profile = growth_profile(&envelope, &shells);
    let threshold = opts
        .threshold
        .unwrap_or_else(|| default_threshold(&envelope));
    profile.verdict = classify_class_f(&profile, threshold, opts.min_decrease_shells);
    let verdict = profile.verdict;

    let b = accumulate(spec, opts.nodes.max(2));

    let relaxed = match (&envelope, &conjugate) {
        (ConvexPiecewise::One(env1), ConvexPiecewise::One(conj1)) => {
            let dual = DualProblem::new(env1, conj1, &b, spec.delta_u()[0]);
            let c = dual.maximize(verdict)?;
            dual.select(c, &spec.u0, 1e-8)?
        }
        (ConvexPiecewise::Two(env2), _) => {
            let du = spec.delta_u();
            let dual = DualProblem2::new(env2, &b, [du[0], du[1]]);
            let c = dual.maximize(verdict, opts.tol)?;
            dual.select(c, &spec.u0, opts.tol.max(1e-8))?
        }
        _ => unreachable!("envelope and conjugate dimensions always match"),
    };

    let relaxed_traj = relaxed_trajectory(spec, &relaxed, &b, &envelope)?;

    let tol_detach = opts.tol * (1.0 + spec.f.finite_range());
    let detachments = if opts.relaxed_only {
        Vec::new()
    } else {
        detachment_set(&relaxed, &spec.f, &envelope, tol_detach)
    };

    let tol_touch = 1e-8;
    let mut paired: Vec<(DetachmentInterval, CaratheodoryCombo)> =
        Vec::with_capacity(detachments.len());
    for det in &detachments {
        let combo = caratheodory_decompose(&spec.f, &envelope, &det.v_bar, tol_touch)?;
        paired.push((det.clone(), combo));
    }

    let scheme = PartitionScheme {
        n_chatter: opts.n_chatter.max(1),
        // budget the linear-term chattering error well under the certificate
        linear_error_budget: Some(0.25 * 1e-4 * (1.0 + relaxed.relaxed_cost.abs())),
    };
    let trajectory = if opts.relaxed_only {
        relaxed_traj.clone()
    } else {
        chatter(spec, &relaxed, &b, &envelope, &paired, scheme)?
    };

    let report = assemble(spec, &relaxed, &trajectory, verdict, detachments.len());

    Ok(SolveOutput {
        envelope,
        conjugate,
        profile,
        accumulated: b,
        relaxed,
        relaxed_traj,
        trajectory,
        detachments,
        report,
    })
}
