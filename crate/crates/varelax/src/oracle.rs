//! Brute-force dynamic-programming oracle for one-dimensional instances.
//!
//! Minimizes `Σᵢ [B̄ᵢ·vᵢ + f(vᵢ)]·Δt` (the same integration-by-parts form as
//! the solver, plus the constant `B(0)·u₀`) over piecewise-constant
//! velocities on a uniform grid, with the accumulated displacement hitting
//! the target cell. The displacement grid spacing is `Δv·Δt`, so every
//! transition lands exactly on a grid level and the only quantization left
//! is the half-cell tolerance on the final displacement.

use crate::error::OracleError;
use crate::problem::{accumulate, ProblemSpec};
use crate::recovery::Trajectory;

/// Grid sizes of the oracle sweep.
#[derive(Debug, Clone, Copy)]
pub struct DpGrid {
    pub n_t: usize,
    pub velocity_levels: usize,
}

impl Default for DpGrid {
    fn default() -> Self {
        DpGrid {
            n_t: 200,
            velocity_levels: 401,
        }
    }
}

/// Outcome of a DP sweep.
#[derive(Debug, Clone)]
pub struct DpResult {
    pub cost: f64,
    pub trajectory: Trajectory,
    /// Distance of the reached displacement from the target (≤ half cell).
    pub displacement_residual: f64,
    /// Lipschitz slack: a bound on how much the cost may move when the
    /// residual is closed, `(max |chord slope of f| + max |B|)·residual`.
    pub cost_slack: f64,
}

/// Exact minimum over the DP grids, with deterministic tie-breaking toward
/// the smallest velocity index.
pub fn dp_minimize(spec: &ProblemSpec, grid: DpGrid) -> Result<DpResult, OracleError> {
    if spec.dim() != 1 {
        return Err(OracleError::DimensionUnsupported(spec.dim()));
    }
    let n_t = grid.n_t.max(1);
    let n_v = grid.velocity_levels.max(2);
    let axis = spec.f.axis(0);
    let (v_lo, v_hi) = (axis.lo, axis.hi);
    let horizon = spec.horizon;
    let dt = horizon / n_t as f64;
    let dv = (v_hi - v_lo) / (n_v - 1) as f64;
    let cell = dv * dt;
    let delta_u = spec.u1[0] - spec.u0[0];

    // displacement after i steps: v_lo·i·dt + k·cell with integer k
    let k_target_f = (delta_u - v_lo * horizon) / cell;
    let k_target = k_target_f.round();
    let k_max = ((n_v - 1) * n_t) as f64;
    if !(0.0..=k_max).contains(&k_target) {
        return Err(OracleError::InfeasibleGrid {
            required: delta_u / horizon,
            lo: v_lo,
            hi: v_hi,
        });
    }
    let k_target = k_target as usize;

    let b = accumulate(spec, n_t + 1);
    let levels: Vec<f64> = (0..n_v)
        .map(|j| {
            if j + 1 == n_v {
                v_hi
            } else {
                v_lo + j as f64 * dv
            }
        })
        .collect();
    let f_cost: Vec<f64> = levels.iter().map(|&v| spec.f.interp_1d(v)).collect();

    // reachability window at step i: k ∈ [k_target - (n_t-i)·span, k_target]
    // intersected with [0, i·span]
    let span = n_v - 1;
    let window = |i: usize| -> (usize, usize) {
        let lo = k_target.saturating_sub((n_t - i) * span);
        let hi = (i * span).min(k_target);
        (lo, hi)
    };

    let mut cur: Vec<f64> = vec![0.0]; // cost at (0, k=0)
    let mut cur_lo = 0usize;
    let mut parents: Vec<(usize, Vec<u16>)> = Vec::with_capacity(n_t);
    for i in 0..n_t {
        let (next_lo, next_hi) = window(i + 1);
        let step_cost: Vec<f64> = {
            // exact integral of B over the step divided out as B̄·v·dt + f·dt
            let b_bar = 0.5 * (b.node1(i) + b.node1(i + 1));
            levels
                .iter()
                .zip(&f_cost)
                .map(|(&v, &fc)| (b_bar * v + fc) * dt)
                .collect()
        };
        let mut next = vec![f64::INFINITY; next_hi - next_lo + 1];
        let mut par = vec![u16::MAX; next_hi - next_lo + 1];
        for (off, &cost_here) in cur.iter().enumerate() {
            if !cost_here.is_finite() {
                continue;
            }
            let k = cur_lo + off;
            let j_min = next_lo.saturating_sub(k).min(span);
            let j_max = (next_hi - k).min(span);
            for (dj, &sc) in step_cost[j_min..=j_max].iter().enumerate() {
                if !sc.is_finite() {
                    continue;
                }
                let j = j_min + dj;
                let nk = k + j - next_lo;
                let cand = cost_here + sc;
                // strict improvement keeps the smallest velocity index on ties
                if cand < next[nk] {
                    next[nk] = cand;
                    par[nk] = j as u16;
                }
            }
        }
        parents.push((next_lo, par));
        cur = next;
        cur_lo = next_lo;
    }

    let final_off = k_target - cur_lo;
    let cost_reduced = cur[final_off];
    if !cost_reduced.is_finite() {
        return Err(OracleError::InfeasibleGrid {
            required: delta_u / horizon,
            lo: v_lo,
            hi: v_hi,
        });
    }

    // backtrack the velocity indices
    let mut js = vec![0usize; n_t];
    let mut k = k_target;
    for i in (0..n_t).rev() {
        let (lo, par) = &parents[i];
        let j = par[k - lo] as usize;
        js[i] = j;
        k -= j;
    }

    let times: Vec<f64> = (0..=n_t)
        .map(|i| {
            if i == n_t {
                horizon
            } else {
                horizon * i as f64 / n_t as f64
            }
        })
        .collect();
    let mut u = Vec::with_capacity(n_t + 1);
    u.push(spec.u0[0]);
    let mut v = Vec::with_capacity(n_t);
    for (i, &j) in js.iter().enumerate() {
        v.push(levels[j]);
        u.push(u[i] + levels[j] * dt);
    }
    let reached = u[n_t] - spec.u0[0];
    let displacement_residual = (reached - delta_u).abs();

    let constant = b.total()[0] * spec.u0[0];
    let cost = constant + cost_reduced;
    let cost_env = cost; // the oracle never sees the envelope
    let (b_min, b_max) = b.range(0);
    let slope_max = max_chord_slope(&spec.f);
    let cost_slack = (slope_max + b_min.abs().max(b_max.abs())) * (0.5 * cell);

    Ok(DpResult {
        cost,
        trajectory: Trajectory {
            times,
            u,
            v,
            cost_f: cost,
            cost_env,
            dim: 1,
        },
        displacement_residual,
        cost_slack,
    })
}

fn max_chord_slope(f: &crate::grid::SampledFunction) -> f64 {
    let pts = f.finite_points_1d();
    pts.windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .fold(0.0, f64::max)
}
