//! Machine-readable outputs: CSV tables with 17-significant-digit floats and
//! a structured text report. Every file carries the numerics configuration
//! as comment lines, so runs are reproducible from their outputs alone.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use varelax::oracle::DpResult;
use varelax::{ConvexPiecewise, GrowthProfile, SolveOptions, SolveOutput, Trajectory};

/// 17 significant decimal digits round-trip `f64` exactly.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn config_header(opts: &SolveOptions) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# nodes = {}", opts.nodes);
    let _ = writeln!(s, "# n_chatter = {}", opts.n_chatter);
    let _ = writeln!(s, "# tol = {}", fmt(opts.tol));
    match &opts.shells {
        Some(r) => {
            let list: Vec<String> = r.iter().map(|&x| fmt(x)).collect();
            let _ = writeln!(s, "# shells = {}", list.join(","));
        }
        None => {
            let _ = writeln!(s, "# shells = default");
        }
    }
    match opts.threshold {
        Some(t) => {
            let _ = writeln!(s, "# threshold = {}", fmt(t));
        }
        None => {
            let _ = writeln!(s, "# threshold = default");
        }
    }
    let _ = writeln!(s, "# min_decrease_shells = {}", opts.min_decrease_shells);
    s
}

pub fn write_trajectory(path: &Path, traj: &Trajectory, opts: &SolveOptions) -> io::Result<()> {
    let m = traj.dim();
    let mut s = config_header(opts);
    let ucols: Vec<String> = (1..=m)
        .map(|k| if m == 1 { "u".into() } else { format!("u{k}") })
        .collect();
    let vcols: Vec<String> = (1..=m)
        .map(|k| if m == 1 { "v".into() } else { format!("v{k}") })
        .collect();
    let _ = writeln!(s, "t,{},{}", ucols.join(","), vcols.join(","));
    let n = traj.times.len();
    for i in 0..n {
        let vrow = traj.v_interval(i.min(n.saturating_sub(2)));
        let ucells: Vec<String> = traj.u_node(i).iter().map(|&x| fmt(x)).collect();
        let vcells: Vec<String> = vrow.iter().map(|&x| fmt(x)).collect();
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt(traj.times[i]),
            ucells.join(","),
            vcells.join(",")
        );
    }
    fs::write(path, s)
}

pub fn write_relaxed_csv(path: &Path, out: &SolveOutput, opts: &SolveOptions) -> io::Result<()> {
    let rel = &out.relaxed;
    let m = rel.dim();
    let mut s = config_header(opts);
    let bcols: Vec<String> = (1..=m)
        .map(|k| if m == 1 { "B".into() } else { format!("B{k}") })
        .collect();
    let vcols: Vec<String> = (1..=m)
        .map(|k| if m == 1 { "v".into() } else { format!("v{k}") })
        .collect();
    let _ = writeln!(s, "s,{},{}", bcols.join(","), vcols.join(","));
    for (i, &t) in rel.times.iter().enumerate() {
        let bcells: Vec<String> = out.accumulated.node(i).iter().map(|&x| fmt(x)).collect();
        let vcells: Vec<String> = rel.v_node(i).iter().map(|&x| fmt(x)).collect();
        let _ = writeln!(s, "{},{},{}", fmt(t), bcells.join(","), vcells.join(","));
    }
    fs::write(path, s)
}

pub fn write_growth_csv(
    path: &Path,
    profile: &GrowthProfile,
    opts: &SolveOptions,
) -> io::Result<()> {
    let mut s = config_header(opts);
    let _ = writeln!(s, "radius,g_max,verdict");
    for e in &profile.shells {
        let g = e.g_max.map(fmt).unwrap_or_default();
        let _ = writeln!(s, "{},{},{}", fmt(e.radius), g, profile.verdict);
    }
    fs::write(path, s)
}

/// Dense node table `x..., f, f_env`: a valid grid-value table that can be
/// re-ingested as a problem function.
pub fn write_envelope_nodes(
    path: &Path,
    f: &varelax::SampledFunction,
    env: &ConvexPiecewise,
    opts: &SolveOptions,
) -> io::Result<()> {
    let mut s = config_header(opts);
    match f.dim() {
        1 => {
            let _ = writeln!(s, "x,f,f_env");
            let axis = f.axis(0);
            for (i, x) in axis.nodes().enumerate() {
                let fx = f.values()[i];
                let ex = varelax::convex::eval(env, &[x]);
                let _ = writeln!(s, "{},{},{}", fmt(x), fmt_or_inf(fx), fmt_or_inf(ex));
            }
        }
        _ => {
            let _ = writeln!(s, "x1,x2,f,f_env");
            let (a0, a1) = (f.axis(0), f.axis(1));
            for (i0, x0) in a0.nodes().enumerate() {
                for (i1, x1) in a1.nodes().enumerate() {
                    let fx = f.values()[i0 * a1.count + i1];
                    let ex = varelax::convex::eval(env, &[x0, x1]);
                    let _ = writeln!(
                        s,
                        "{},{},{},{}",
                        fmt(x0),
                        fmt(x1),
                        fmt_or_inf(fx),
                        fmt_or_inf(ex)
                    );
                }
            }
        }
    }
    fs::write(path, s)
}

fn fmt_or_inf(x: f64) -> String {
    if x.is_finite() {
        fmt(x)
    } else {
        "inf".to_string()
    }
}

pub fn write_breakpoints(path: &Path, g: &ConvexPiecewise, opts: &SolveOptions) -> io::Result<()> {
    let mut s = config_header(opts);
    match g {
        ConvexPiecewise::One(c) => {
            let _ = writeln!(s, "x,y");
            for (x, y) in c.breakpoints() {
                let _ = writeln!(s, "{},{}", fmt(x), fmt(y));
            }
        }
        ConvexPiecewise::Two(c) => {
            let _ = writeln!(s, "x1,x2,y");
            for &(x, y) in c.vertices() {
                let _ = writeln!(s, "{},{},{}", fmt(x[0]), fmt(x[1]), fmt(y));
            }
        }
    }
    fs::write(path, s)
}

pub fn report_lines(out: &SolveOutput, opts: &SolveOptions, status: &str) -> String {
    let r = &out.report;
    let mut s = String::new();
    let _ = writeln!(s, "status = {status}");
    let _ = writeln!(s, "dim = {}", out.relaxed.dim());
    let _ = writeln!(s, "growth_verdict = {}", r.growth_verdict);
    let c: Vec<String> = out.relaxed.c.iter().map(|&x| fmt(x)).collect();
    let _ = writeln!(s, "c = {}", c.join(","));
    if let Some(theta) = out.relaxed.theta {
        let _ = writeln!(s, "theta = {}", fmt(theta));
    }
    let _ = writeln!(s, "relaxed_cost = {}", fmt(r.relaxed_cost));
    let _ = writeln!(s, "dual_value = {}", fmt(r.dual_value));
    let _ = writeln!(s, "duality_gap = {}", fmt(r.duality_gap));
    let _ = writeln!(s, "cost_f = {}", fmt(r.cost_f));
    let _ = writeln!(s, "cost_env = {}", fmt(r.cost_env));
    let _ = writeln!(s, "gap = {}", fmt(r.gap));
    let _ = writeln!(s, "endpoint_residual = {}", fmt(r.endpoint_residual));
    let _ = writeln!(s, "is_minimizer = {}", r.is_minimizer);
    let _ = writeln!(s, "tol_cert = {}", fmt(r.tol_cert));
    let _ = writeln!(s, "tol_gap = {}", fmt(r.tol_gap));
    let _ = writeln!(s, "detachment_intervals = {}", r.detachment_intervals);
    let _ = writeln!(s, "chatter_switches = {}", r.chatter_switches);
    let _ = writeln!(
        s,
        "multivalued_segments = {}",
        out.relaxed.multivalued_segments.len()
    );
    s.push_str(&config_header(opts).replace("# ", ""));
    s
}

pub fn write_dp_report(
    path: &Path,
    dp: &DpResult,
    n_t: usize,
    levels: usize,
    opts: &SolveOptions,
) -> io::Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "status = oracle");
    let _ = writeln!(s, "cost = {}", fmt(dp.cost));
    let _ = writeln!(
        s,
        "displacement_residual = {}",
        fmt(dp.displacement_residual)
    );
    let _ = writeln!(s, "cost_slack = {}", fmt(dp.cost_slack));
    let _ = writeln!(s, "dp_steps = {n_t}");
    let _ = writeln!(s, "dp_levels = {levels}");
    s.push_str(&config_header(opts).replace("# ", ""));
    fs::write(path, s)
}
