//! Recovery of a minimizer of the original non-convex problem.
//!
//! On the detachment set, where the relaxed velocity lands in the gap
//! `f** < f`, the velocity is replaced by a piecewise-constant chattering
//! among touching points of the envelope. The time average over each piece
//! reproduces the relaxed velocity exactly, so endpoints are preserved, and
//! `f = f**` at the touching points keeps the cost equal up to the linear
//! term's variation across a piece, which shrinks like the piece length.

use crate::convex::{eval as env_eval, CaratheodoryCombo, ConvexPiecewise};
use crate::dual::RelaxedSolution;
use crate::error::RecoveryError;
use crate::grid::SampledFunction;
use crate::growth::Verdict;
use crate::problem::{AccumulatedTerm, ProblemSpec};

/// Piecewise-linear trajectory: time nodes (non-uniform once chattering
/// switch times are in), `u` per node, `v` per interval, and the cost under
/// both the original and the convexified integrand.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Node-major, stride = dim.
    pub u: Vec<f64>,
    /// Interval-major, stride = dim; `v[j]` holds on `[times[j], times[j+1])`.
    pub v: Vec<f64>,
    pub cost_f: f64,
    pub cost_env: f64,
    pub(crate) dim: usize,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn u_node(&self, i: usize) -> &[f64] {
        &self.u[i * self.dim..(i + 1) * self.dim]
    }

    pub fn v_interval(&self, j: usize) -> &[f64] {
        &self.v[j * self.dim..(j + 1) * self.dim]
    }

    pub fn intervals(&self) -> usize {
        self.times.len() - 1
    }

    /// Piecewise-linear evaluation of `u` component `k` at time `t`.
    pub fn u_at(&self, k: usize, t: f64) -> f64 {
        let i = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return self.u[i * self.dim + k],
            Err(i) => i.clamp(1, self.times.len() - 1) - 1,
        };
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let frac = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
        let ua = self.u[i * self.dim + k];
        let ub = self.u[(i + 1) * self.dim + k];
        ua + frac * (ub - ua)
    }
}

/// Maximal time interval on which the relaxed velocity is detached
/// (`f(v) - f**(v) > tol`), carrying the constant velocity it holds there.
#[derive(Debug, Clone)]
pub struct DetachmentInterval {
    pub start: f64,
    pub end: f64,
    /// First and last quadrature-interval indices of the run.
    pub first_interval: usize,
    pub last_interval: usize,
    pub v_bar: Vec<f64>,
}

/// Per-interval velocities of the relaxed solution: the trapezoid-consistent
/// interval averages of the node selection.
pub(crate) fn interval_velocities(rel: &RelaxedSolution) -> Vec<f64> {
    let m = rel.dim();
    let n = rel.times.len();
    let mut w = Vec::with_capacity((n - 1) * m);
    for i in 0..n - 1 {
        for k in 0..m {
            w.push(0.5 * (rel.v[i * m + k] + rel.v[(i + 1) * m + k]));
        }
    }
    w
}

/// Maximal intervals where the relaxed velocity sits strictly inside the
/// relaxation gap, with `f` evaluated by grid interpolation. Runs are split
/// where the velocity changes, so each interval carries one constant `v_bar`.
pub fn detachment_set(
    rel: &RelaxedSolution,
    f: &SampledFunction,
    env: &ConvexPiecewise,
    tol_detach: f64,
) -> Vec<DetachmentInterval> {
    let m = rel.dim();
    let w = interval_velocities(rel);
    let n_int = rel.times.len() - 1;
    let detached: Vec<bool> = (0..n_int)
        .map(|j| {
            let vj = &w[j * m..(j + 1) * m];
            // f(v) may be +inf (velocity inside a forbidden band): that is
            // maximal detachment, not an exemption
            let fv = f.interp(vj);
            let ev = env_eval(env, vj);
            ev.is_finite() && fv - ev > tol_detach
        })
        .collect();
    let same_v = |a: usize, b: usize| {
        (0..m).all(|k| {
            let (x, y) = (w[a * m + k], w[b * m + k]);
            (x - y).abs() <= 1e-12 * (1.0 + x.abs())
        })
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for j in 0..=n_int {
        let open = detached.get(j).copied().unwrap_or(false);
        let extend = matches!(start, Some(s) if open && same_v(s, j));
        match (start, open) {
            (None, true) => start = Some(j),
            (Some(s), _) if !extend => {
                out.push(DetachmentInterval {
                    start: rel.times[s],
                    end: rel.times[j],
                    first_interval: s,
                    last_interval: j - 1,
                    v_bar: w[s * m..(s + 1) * m].to_vec(),
                });
                start = if open { Some(j) } else { None };
            }
            _ => {}
        }
    }
    out
}

/// How detachment intervals are partitioned for chattering.
#[derive(Debug, Clone, Copy)]
pub struct PartitionScheme {
    /// Number of equal pieces per detachment interval; each piece is
    /// chattered independently, so `‖u - u_relaxed‖∞ = O(1/n_chatter)`.
    pub n_chatter: usize,
    /// When set, pieces are further refined until the linear-term error
    /// bound `Lip(B)·piece_len²·face_width / 2` summed over the interval
    /// stays within this budget. The certificate check remains the final
    /// authority.
    pub linear_error_budget: Option<f64>,
}

impl Default for PartitionScheme {
    fn default() -> Self {
        PartitionScheme {
            n_chatter: 16,
            linear_error_budget: None,
        }
    }
}

/// Replaces the relaxed velocity on each detachment interval by the
/// piecewise-constant chattering of its decomposition: each piece of the
/// partition is split into sub-intervals of lengths `λⱼ·len` (descending
/// weight order, ties by ascending point), with `v = ξⱼ` on the j-th. The
/// integral of `v` over every piece is unchanged.
pub fn chatter(
    spec: &ProblemSpec,
    rel: &RelaxedSolution,
    b: &AccumulatedTerm,
    env: &ConvexPiecewise,
    detachments: &[(DetachmentInterval, CaratheodoryCombo)],
    scheme: PartitionScheme,
) -> Result<Trajectory, RecoveryError> {
    let m = rel.dim();
    let w = interval_velocities(rel);
    let n_int = rel.times.len() - 1;

    for (det, combo) in detachments {
        let mut rep = vec![0.0; m];
        for (pt, &wt) in combo.points.iter().zip(&combo.weights) {
            for k in 0..m {
                rep[k] += wt * pt[k];
            }
        }
        let err = (0..m)
            .map(|k| (rep[k] - det.v_bar[k]).abs())
            .fold(0.0, f64::max);
        if err > 1e-9 * (1.0 + det.v_bar.iter().map(|x| x.abs()).fold(0.0, f64::max)) {
            return Err(RecoveryError::ComboMismatch {
                start: det.start,
                end: det.end,
                represented: rep,
                average: det.v_bar.clone(),
            });
        }
    }

    let mut times: Vec<f64> = Vec::with_capacity(rel.times.len());
    let mut v: Vec<f64> = Vec::new();
    times.push(rel.times[0]);
    let mut det_iter = detachments.iter().peekable();
    let mut j = 0;
    while j < n_int {
        if let Some((det, combo)) = det_iter.peek() {
            if det.first_interval == j {
                emit_chatter(det, combo, &scheme, b, &mut times, &mut v);
                j = det.last_interval + 1;
                det_iter.next();
                continue;
            }
        }
        times.push(rel.times[j + 1]);
        v.extend_from_slice(&w[j * m..(j + 1) * m]);
        j += 1;
    }

    assemble_trajectory(spec, b, env, times, v)
}

fn emit_chatter(
    det: &DetachmentInterval,
    combo: &CaratheodoryCombo,
    scheme: &PartitionScheme,
    b: &AccumulatedTerm,
    times: &mut Vec<f64>,
    v: &mut Vec<f64>,
) {
    // weights descending, ties by ascending point (lexicographic)
    let mut order: Vec<usize> = (0..combo.weights.len()).collect();
    order.sort_by(|&i, &j| {
        combo.weights[j]
            .total_cmp(&combo.weights[i])
            .then_with(|| combo.points[i].partial_cmp(&combo.points[j]).unwrap())
    });
    let mut pieces = scheme.n_chatter.max(1);
    if let Some(budget) = scheme.linear_error_budget {
        // linear-term error across one piece is at most
        // Lip(B)·len²·width/2; refine until the interval total fits
        let lip = lipschitz_of_b(b, det.start, det.end);
        let width = combo_width(combo);
        let len = det.end - det.start;
        if budget > 0.0 && lip * width > 0.0 {
            let needed = (lip * len * len * width / (2.0 * budget)).ceil();
            if needed.is_finite() {
                pieces = pieces.max((needed as usize).min(200_000));
            }
        }
    }
    let len = (det.end - det.start) / pieces as f64;
    for piece in 0..pieces {
        let a = det.start + piece as f64 * len;
        let piece_end = if piece + 1 == pieces {
            det.end
        } else {
            a + len
        };
        let mut t = a;
        for (rank, &oi) in order.iter().enumerate() {
            let sub_end = if rank + 1 == order.len() {
                piece_end
            } else {
                t + combo.weights[oi] * (piece_end - a)
            };
            if sub_end > t {
                times.push(sub_end);
                v.extend_from_slice(&combo.points[oi]);
                t = sub_end;
            }
        }
    }
}

fn lipschitz_of_b(b: &AccumulatedTerm, start: f64, end: f64) -> f64 {
    // max |dB/ds| = max |a| over the covered nodes, per component
    let mut lip: f64 = 0.0;
    let n = b.len();
    for i in 0..n - 1 {
        let (ta, tb) = (b.times[i], b.times[i + 1]);
        if tb < start || ta > end {
            continue;
        }
        for k in 0..b.dim() {
            let slope = (b.node(i + 1)[k] - b.node(i)[k]) / (tb - ta);
            lip = lip.max(slope.abs());
        }
    }
    lip
}

fn combo_width(combo: &CaratheodoryCombo) -> f64 {
    let mut w: f64 = 0.0;
    for i in 0..combo.points.len() {
        for j in i + 1..combo.points.len() {
            let d: f64 = combo.points[i]
                .iter()
                .zip(&combo.points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            w = w.max(d);
        }
    }
    w
}

fn assemble_trajectory(
    spec: &ProblemSpec,
    b: &AccumulatedTerm,
    env: &ConvexPiecewise,
    times: Vec<f64>,
    v: Vec<f64>,
) -> Result<Trajectory, RecoveryError> {
    let m = spec.dim();
    let n = times.len();
    let mut u = Vec::with_capacity(n * m);
    u.extend_from_slice(&spec.u0);
    for j in 0..n - 1 {
        let dt = times[j + 1] - times[j];
        for k in 0..m {
            let prev = u[j * m + k];
            u.push(prev + v[j * m + k] * dt);
        }
    }
    // costs in the integration-by-parts form: B(0)·u₀ + Σⱼ [v·∫B + f(v)·len]
    let constant: f64 = (0..m).map(|k| b.total()[k] * spec.u0[k]).sum();
    let mut cost_f = constant;
    let mut cost_env = constant;
    for j in 0..n - 1 {
        let (ta, tb) = (times[j], times[j + 1]);
        let len = tb - ta;
        let vj = &v[j * m..(j + 1) * m];
        let linear: f64 = (0..m).map(|k| vj[k] * b.integrate(k, ta, tb)).sum();
        cost_f += linear + spec.f.interp(vj) * len;
        cost_env += linear + env_eval(env, vj) * len;
    }
    Ok(Trajectory {
        times,
        u,
        v,
        cost_f,
        cost_env,
        dim: m,
    })
}

/// Builds the trajectory of the relaxed solution itself (no chattering), for
/// reports and for measuring the chattering deviation.
pub fn relaxed_trajectory(
    spec: &ProblemSpec,
    rel: &RelaxedSolution,
    b: &AccumulatedTerm,
    env: &ConvexPiecewise,
) -> Result<Trajectory, RecoveryError> {
    let w = interval_velocities(rel);
    assemble_trajectory(spec, b, env, rel.times.clone(), w)
}

/// Final report: costs, residuals and the optimality certificate.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub relaxed_cost: f64,
    pub dual_value: f64,
    /// `relaxed_cost - dual_value`: strong-duality certificate of the
    /// relaxed solve.
    pub duality_gap: f64,
    pub cost_f: f64,
    pub cost_env: f64,
    /// `cost_f - relaxed_cost`: what chattering failed to recover.
    pub gap: f64,
    pub endpoint_residual: f64,
    pub growth_verdict: Verdict,
    pub is_minimizer: bool,
    pub tol_cert: f64,
    pub tol_gap: f64,
    pub detachment_intervals: usize,
    pub chatter_switches: usize,
}

/// Collects the certificate data of a recovered trajectory. `is_minimizer`
/// holds when the recovered cost sits on the certified dual lower bound:
/// `gap ≤ tol_cert` and `duality_gap ≤ tol_gap`.
pub fn assemble(
    spec: &ProblemSpec,
    rel: &RelaxedSolution,
    traj: &Trajectory,
    verdict: Verdict,
    detachment_intervals: usize,
) -> SolveReport {
    let m = spec.dim();
    let n = traj.times.len();
    let endpoint_residual = (0..m)
        .map(|k| (traj.u[(n - 1) * m + k] - spec.u1[k]).abs())
        .fold(0.0, f64::max);
    let duality_gap = rel.relaxed_cost - rel.dual_value;
    let gap = traj.cost_f - rel.relaxed_cost;
    let tol_cert = 1e-4 * (1.0 + rel.relaxed_cost.abs());
    let tol_gap = 1e-5 * (1.0 + rel.dual_value.abs());
    let mut switches = 0;
    for j in 1..traj.intervals() {
        let prev = traj.v_interval(j - 1);
        let cur = traj.v_interval(j);
        if prev
            .iter()
            .zip(cur)
            .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
        {
            switches += 1;
        }
    }
    SolveReport {
        relaxed_cost: rel.relaxed_cost,
        dual_value: rel.dual_value,
        duality_gap,
        cost_f: traj.cost_f,
        cost_env: traj.cost_env,
        gap,
        endpoint_residual,
        growth_verdict: verdict,
        is_minimizer: gap <= tol_cert && duality_gap.abs() <= tol_gap,
        tol_cert,
        tol_gap,
        detachment_intervals,
        chatter_switches: switches,
    }
}

impl SolveReport {
    /// The certificate as a hard error, for callers that must not accept an
    /// uncertified run silently.
    pub fn check_certificate(&self) -> Result<(), RecoveryError> {
        if self.gap > self.tol_cert {
            Err(RecoveryError::CertificateFailure {
                gap: self.gap,
                tol: self.tol_cert,
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{convex_envelope, legendre_conjugate, ConvexPiecewise};
    use crate::dual::DualProblem;
    use crate::grid::SampledFunction;
    use crate::problem::{accumulate, LinearTerm};

    fn solve_relaxed(
        spec: &ProblemSpec,
        nodes: usize,
    ) -> (ConvexPiecewise, AccumulatedTerm, RelaxedSolution) {
        let env = convex_envelope(&spec.f).unwrap();
        let conj = legendre_conjugate(&env).unwrap();
        let b = accumulate(spec, nodes);
        let (env1, conj1) = (env.as_one().unwrap(), conj.as_one().unwrap());
        let dual = DualProblem::new(env1, conj1, &b, spec.delta_u()[0]);
        let c = dual.maximize(crate::growth::Verdict::Inconclusive).unwrap();
        let rel = dual.select(c, &spec.u0, 1e-8).unwrap();
        (env, b, rel)
    }

    fn double_well_spec(u1: f64, a: LinearTerm) -> ProblemSpec {
        let f = SampledFunction::from_fn_1d(-2.0, 2.0, 0.5, |x| {
            let t = x * x - 1.0;
            t * t
        });
        ProblemSpec::new(1.0, vec![0.0], vec![u1], a, f).unwrap()
    }

    #[test]
    fn detachment_covers_the_well_and_only_the_well() {
        let spec = double_well_spec(0.0, LinearTerm::zero(1));
        let (env, _, rel) = solve_relaxed(&spec, 101);
        let dets = detachment_set(&rel, &spec.f, &env, 1e-6 * 10.0);
        assert_eq!(dets.len(), 1);
        assert_eq!((dets[0].start, dets[0].end), (0.0, 1.0));
        assert_eq!(dets[0].v_bar, vec![0.0]);
    }

    #[test]
    fn convex_integrands_have_empty_detachment() {
        let fq = SampledFunction::from_fn_1d(-2.0, 2.0, 0.25, |x| x * x);
        for a in [LinearTerm::zero(1), LinearTerm::constant(vec![1.0])] {
            let spec = ProblemSpec::new(1.0, vec![0.0], vec![0.0], a, fq.clone()).unwrap();
            let (env, _, rel) = solve_relaxed(&spec, 101);
            assert!(detachment_set(&rel, &spec.f, &env, 1e-5).is_empty());
        }
    }

    #[test]
    fn chatter_orders_equal_weights_by_ascending_point() {
        // the symmetric well splits [0, 1/2] at v = -1 and [1/2, 1] at v = +1
        let spec = double_well_spec(0.0, LinearTerm::zero(1));
        let (env, b, rel) = solve_relaxed(&spec, 101);
        let dets = detachment_set(&rel, &spec.f, &env, 1e-5);
        let combo =
            crate::convex::caratheodory_decompose(&spec.f, &env, &dets[0].v_bar, 1e-8).unwrap();
        let traj = chatter(
            &spec,
            &rel,
            &b,
            &env,
            &[(dets[0].clone(), combo)],
            PartitionScheme {
                n_chatter: 1,
                linear_error_budget: None,
            },
        )
        .unwrap();
        assert_eq!(traj.times, vec![0.0, 0.5, 1.0]);
        assert_eq!(traj.v, vec![-1.0, 1.0]);
        assert_eq!(traj.u_node(2)[0], 0.0);
        assert_eq!(traj.cost_f, 0.0);
    }

    #[test]
    fn chatter_rejects_mismatched_combos() {
        let spec = double_well_spec(0.0, LinearTerm::zero(1));
        let (env, b, rel) = solve_relaxed(&spec, 101);
        let dets = detachment_set(&rel, &spec.f, &env, 1e-5);
        let bad = crate::convex::CaratheodoryCombo {
            points: vec![vec![-1.0], vec![1.0]],
            weights: vec![0.25, 0.75], // represents 0.5, not the interval's 0.0
            represented: vec![0.5],
        };
        let err = chatter(
            &spec,
            &rel,
            &b,
            &env,
            &[(dets[0].clone(), bad)],
            PartitionScheme::default(),
        )
        .unwrap_err();
        assert!(matches!(err, RecoveryError::ComboMismatch { .. }));
    }

    #[test]
    fn n_chatter_controls_the_sawtooth_amplitude() {
        let spec = double_well_spec(0.0, LinearTerm::zero(1));
        let (env, b, rel) = solve_relaxed(&spec, 101);
        let dets = detachment_set(&rel, &spec.f, &env, 1e-5);
        let combo =
            crate::convex::caratheodory_decompose(&spec.f, &env, &dets[0].v_bar, 1e-8).unwrap();
        let traj = chatter(
            &spec,
            &rel,
            &b,
            &env,
            &[(dets[0].clone(), combo)],
            PartitionScheme {
                n_chatter: 4,
                linear_error_budget: None,
            },
        )
        .unwrap();
        let sup = traj.u.iter().fold(0.0f64, |m, &u| m.max(u.abs()));
        assert_eq!(sup, 0.125);
        assert_eq!(traj.cost_f, 0.0);
    }
}
