//! Browser demo bindings: three interactive views over the solver core,
//! returning JSON strings so the page stays framework-free. The same
//! functions compile natively for testing; the `wasm_bindgen` attribute is
//! active only on the wasm target.

use serde::Serialize;
use varelax::convex::Convex1;
use varelax::expr::Expr;
use varelax::{
    classify_class_f, growth_profile, solve, LinearTerm, ProblemSpec, SampledFunction, SolveOptions,
};

#[cfg(target_arch = "wasm32")]
use wasm_bindgen::prelude::wasm_bindgen;

#[derive(Serialize)]
struct Point {
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct EnvelopeView {
    samples: Vec<Point>,
    envelope: Vec<Point>,
    conjugate: Vec<Point>,
    slope_box: [f64; 2],
}

#[derive(Serialize)]
struct GrowthView {
    shells: Vec<ShellView>,
    verdict: String,
    divergence_slope: f64,
    threshold: f64,
}

#[derive(Serialize)]
struct ShellView {
    radius: f64,
    g_max: Option<f64>,
    pieces: usize,
}

#[derive(Serialize)]
struct SolveView {
    relaxed_u: Vec<Point>,
    chattered_u: Vec<Point>,
    chattered_v: Vec<Point>,
    detachment: Vec<[f64; 2]>,
    relaxed_cost: f64,
    dual_value: f64,
    cost_f: f64,
    gap: f64,
    endpoint_residual: f64,
    verdict: String,
    is_minimizer: bool,
    c: f64,
    switches: usize,
}

fn err_json(msg: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": msg.to_string() }).to_string()
}

fn parse_function(expr: &str, lo: f64, hi: f64, step: f64) -> Result<SampledFunction, String> {
    if step.is_nan() || lo.is_nan() || hi.is_nan() || step <= 0.0 || lo >= hi {
        return Err("need lo < hi and step > 0".into());
    }
    if (hi - lo) / step > 4096.0 {
        return Err("grid too fine for the demo (over 4096 nodes)".into());
    }
    let e = Expr::parse(expr, &["x"]).map_err(|e| e.to_string())?;
    Ok(SampledFunction::from_fn_1d(lo, hi, step, |x| e.eval(&[x])))
}

/// Envelope explorer: samples of `f`, breakpoints of `f**` and of `f*`.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
pub fn envelope_view(expr: &str, lo: f64, hi: f64, step: f64) -> String {
    let f = match parse_function(expr, lo, hi, step) {
        Ok(f) => f,
        Err(e) => return err_json(e),
    };
    let env = match Convex1::envelope(&f) {
        Ok(env) => env,
        Err(e) => return err_json(e),
    };
    let conj = env.conjugate();
    let view = EnvelopeView {
        samples: f
            .finite_points_1d()
            .into_iter()
            .map(|(x, y)| Point { x, y })
            .collect(),
        envelope: env.breakpoints().map(|(x, y)| Point { x, y }).collect(),
        conjugate: conj.breakpoints().map(|(x, y)| Point { x, y }).collect(),
        slope_box: [conj.domain().0, conj.domain().1],
    };
    serde_json::to_string(&view).unwrap_or_else(err_json)
}

/// Growth-profile explorer: per-shell maxima of `f**(x) - x·∇f**(x)` and the
/// three-valued class verdict.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
pub fn growth_view(expr: &str, lo: f64, hi: f64, step: f64, threshold: f64) -> String {
    let f = match parse_function(expr, lo, hi, step) {
        Ok(f) => f,
        Err(e) => return err_json(e),
    };
    let env = match varelax::convex_envelope(&f) {
        Ok(env) => env,
        Err(e) => return err_json(e),
    };
    let shells = varelax::growth::default_shells(&env);
    let mut profile = growth_profile(&env, &shells);
    profile.verdict = classify_class_f(&profile, threshold, 3);
    let view = GrowthView {
        shells: profile
            .shells
            .iter()
            .map(|s| ShellView {
                radius: s.radius,
                g_max: s.g_max,
                pieces: s.pieces,
            })
            .collect(),
        verdict: profile.verdict.to_string(),
        divergence_slope: profile.divergence_slope,
        threshold,
    };
    serde_json::to_string(&view).unwrap_or_else(err_json)
}

/// Full pipeline on a one-dimensional instance: relaxed and chattered
/// trajectories plus the certificate numbers.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
#[allow(clippy::too_many_arguments)]
pub fn solve_view(
    f_expr: &str,
    a_expr: &str,
    lo: f64,
    hi: f64,
    step: f64,
    u0: f64,
    u1: f64,
    horizon: f64,
    n_chatter: u32,
) -> String {
    let f = match parse_function(f_expr, lo, hi, step) {
        Ok(f) => f,
        Err(e) => return err_json(e),
    };
    let a = match Expr::parse(a_expr, &["t"]) {
        Ok(e) => LinearTerm::Exprs(vec![e]),
        Err(e) => return err_json(e),
    };
    let spec = match ProblemSpec::new(horizon, vec![u0], vec![u1], a, f) {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };
    let opts = SolveOptions {
        nodes: 501,
        n_chatter: n_chatter.clamp(1, 256) as usize,
        ..Default::default()
    };
    let out = match solve(&spec, &opts) {
        Ok(out) => out,
        Err(e) => return err_json(e),
    };
    let sample_u = |traj: &varelax::Trajectory| -> Vec<Point> {
        traj.times
            .iter()
            .enumerate()
            .map(|(i, &t)| Point {
                x: t,
                y: traj.u_node(i)[0],
            })
            .collect()
    };
    let chattered_v = out
        .trajectory
        .times
        .iter()
        .take(out.trajectory.times.len() - 1)
        .enumerate()
        .map(|(j, &t)| Point {
            x: t,
            y: out.trajectory.v_interval(j)[0],
        })
        .collect();
    let view = SolveView {
        relaxed_u: sample_u(&out.relaxed_traj),
        chattered_u: sample_u(&out.trajectory),
        chattered_v,
        detachment: out.detachments.iter().map(|d| [d.start, d.end]).collect(),
        relaxed_cost: out.report.relaxed_cost,
        dual_value: out.report.dual_value,
        cost_f: out.report.cost_f,
        gap: out.report.gap,
        endpoint_residual: out.report.endpoint_residual,
        verdict: out.report.growth_verdict.to_string(),
        is_minimizer: out.report.is_minimizer,
        c: out.relaxed.c[0],
        switches: out.report.chatter_switches,
    };
    serde_json::to_string(&view).unwrap_or_else(err_json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_view_emits_breakpoints() {
        let json = envelope_view("(x^2-1)^2", -2.0, 2.0, 0.5);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["envelope"].as_array().unwrap().len(), 6);
        assert!(v["error"].is_null());
    }

    #[test]
    fn growth_view_classifies() {
        let json = growth_view("abs(x)", -8.0, 8.0, 0.25, -10.0);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["verdict"], "NotInClassF");
    }

    #[test]
    fn solve_view_reports_chattering() {
        let json = solve_view("(x^2-1)^2", "0", -2.0, 2.0, 0.5, 0.0, 0.0, 1.0, 4);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["is_minimizer"].as_bool().unwrap());
        assert!(v["cost_f"].as_f64().unwrap().abs() <= 1e-9);
        assert!(v["switches"].as_u64().unwrap() >= 4);
        assert_eq!(v["detachment"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn errors_come_back_as_json() {
        let json = envelope_view("sin(x)", -1.0, 1.0, 0.5);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["error"].as_str().unwrap().contains("unknown name"));
    }
}
