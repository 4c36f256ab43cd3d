//! Command-line runner: parse a problem file, run the pipeline
//! (envelope → growth check → relaxed solve → recovery → certificate) and
//! emit machine-readable outputs.
//!
//! Exit codes: 0 success (certified minimizer), 1 validation/IO error,
//! 2 no minimizer (dual supremum not attained; growth verdict attached),
//! 3 certificate failure (trajectory written, cost gap above tolerance).

mod emit;
mod file;

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use varelax::error::{DualError, SolveError};
use varelax::oracle::{dp_minimize, DpGrid};
use varelax::{convex_envelope, legendre_conjugate, solve, SolveOptions};

#[derive(Parser)]
#[command(
    name = "varelax",
    version,
    about = "Relaxation solver for non-convex, non-coercive variational problems"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full pipeline and emit trajectory.csv plus report.txt
    Solve {
        file: PathBuf,
        /// Stop after the relaxed problem; emit (s, B, v) instead of chattering
        #[arg(long)]
        relaxed_only: bool,
        #[command(flatten)]
        flags: NumericFlags,
    },
    /// Evaluate the growth profile of f** and classify the integrand
    CheckGrowth {
        file: PathBuf,
        #[command(flatten)]
        flags: NumericFlags,
    },
    /// Emit the envelope node table and the breakpoints of f** and f*
    Envelope {
        file: PathBuf,
        #[command(flatten)]
        flags: NumericFlags,
    },
    /// Brute-force dynamic-programming minimizer (dim 1), for validation
    Oracle {
        file: PathBuf,
        /// Time steps of the DP sweep
        #[arg(long, default_value_t = 200)]
        dp_steps: usize,
        /// Velocity levels of the DP sweep
        #[arg(long, default_value_t = 401)]
        dp_levels: usize,
        #[command(flatten)]
        flags: NumericFlags,
    },
}

#[derive(Args)]
struct NumericFlags {
    /// Quadrature nodes
    #[arg(long)]
    nodes: Option<usize>,
    /// Chattering pieces per detachment interval
    #[arg(long)]
    chatter: Option<usize>,
    /// Base tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Growth-shell radii (comma separated)
    #[arg(long, value_delimiter = ',')]
    shells: Option<Vec<f64>>,
    /// Output directory (defaults to the problem file's `outputs.dir` or `.`)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let (path, flags) = match &cli.cmd {
        Cmd::Solve { file, flags, .. }
        | Cmd::CheckGrowth { file, flags }
        | Cmd::Envelope { file, flags }
        | Cmd::Oracle { file, flags, .. } => (file.clone(), flags),
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (spec, mut opts, outputs) =
        file::load(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(n) = flags.nodes {
        opts.nodes = n;
    }
    if let Some(n) = flags.chatter {
        opts.n_chatter = n;
    }
    if let Some(t) = flags.tol {
        opts.tol = t;
    }
    if let Some(shells) = &flags.shells {
        if shells.iter().any(|r| r.is_nan()) || shells.windows(2).any(|w| w[0] >= w[1]) {
            return Err("--shells must be strictly increasing".into());
        }
        opts.shells = Some(shells.clone());
    }
    let out_dir = flags
        .out
        .clone()
        .or_else(|| outputs.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;

    match cli.cmd {
        Cmd::Solve { relaxed_only, .. } => {
            opts.relaxed_only = relaxed_only;
            run_solve(&spec, &opts, &out_dir)
        }
        Cmd::CheckGrowth { .. } => run_check_growth(&spec, &opts, &out_dir),
        Cmd::Envelope { .. } => run_envelope(&spec, &opts, &out_dir),
        Cmd::Oracle {
            dp_steps,
            dp_levels,
            ..
        } => run_oracle(&spec, &opts, dp_steps, dp_levels, &out_dir),
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> String + '_ {
    move |e| format!("{}: {e}", path.display())
}

fn run_solve(
    spec: &varelax::ProblemSpec,
    opts: &SolveOptions,
    dir: &Path,
) -> Result<ExitCode, String> {
    match solve(spec, opts) {
        Ok(out) => {
            let traj_path = dir.join("trajectory.csv");
            emit::write_trajectory(&traj_path, &out.trajectory, opts)
                .map_err(io_err(&traj_path))?;
            if opts.relaxed_only {
                let rel_path = dir.join("relaxed.csv");
                emit::write_relaxed_csv(&rel_path, &out, opts).map_err(io_err(&rel_path))?;
            }
            // without recovery the certificate is the duality gap alone;
            // cost_f of the relaxed trajectory then shows the relaxation gap
            let ok = if opts.relaxed_only {
                out.report.duality_gap.abs() <= out.report.tol_gap
            } else {
                out.report.is_minimizer
            };
            let status = if opts.relaxed_only {
                "relaxed"
            } else if ok {
                "minimizer"
            } else {
                "certificate_failure"
            };
            let report_path = dir.join("report.txt");
            std::fs::write(&report_path, emit::report_lines(&out, opts, status))
                .map_err(io_err(&report_path))?;
            println!(
                "{status}: cost_f = {}, dual = {}, gap = {}",
                emit::fmt(out.report.cost_f),
                emit::fmt(out.report.dual_value),
                emit::fmt(out.report.gap),
            );
            if ok {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "certificate failure: gap {} exceeds tolerance {}",
                    emit::fmt(out.report.gap),
                    emit::fmt(out.report.tol_cert)
                );
                Ok(ExitCode::from(3))
            }
        }
        Err(SolveError::Dual(DualError::NoMinimizer { reason, verdict })) => {
            let report_path = dir.join("report.txt");
            let mut s = String::new();
            s.push_str("status = no_minimizer\n");
            s.push_str(&format!("growth_verdict = {verdict}\n"));
            s.push_str(&format!("reason = {reason}\n"));
            s.push_str(&emit::config_header(opts).replace("# ", ""));
            std::fs::write(&report_path, s).map_err(io_err(&report_path))?;
            eprintln!("no minimizer: {reason} (growth verdict: {verdict})");
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn run_check_growth(
    spec: &varelax::ProblemSpec,
    opts: &SolveOptions,
    dir: &Path,
) -> Result<ExitCode, String> {
    let env = convex_envelope(&spec.f).map_err(|e| e.to_string())?;
    let shells = opts
        .shells
        .clone()
        .unwrap_or_else(|| varelax::growth::default_shells(&env));
    let mut profile = varelax::growth_profile(&env, &shells);
    let threshold = opts
        .threshold
        .unwrap_or_else(|| varelax::growth::default_threshold(&env));
    profile.verdict = varelax::classify_class_f(&profile, threshold, opts.min_decrease_shells);
    let path = dir.join("growth.csv");
    emit::write_growth_csv(&path, &profile, opts).map_err(io_err(&path))?;
    println!("verdict: {}", profile.verdict);
    Ok(ExitCode::SUCCESS)
}

fn run_envelope(
    spec: &varelax::ProblemSpec,
    opts: &SolveOptions,
    dir: &Path,
) -> Result<ExitCode, String> {
    let env = convex_envelope(&spec.f).map_err(|e| e.to_string())?;
    let conj = legendre_conjugate(&env).map_err(|e| e.to_string())?;
    let nodes = dir.join("envelope_nodes.csv");
    emit::write_envelope_nodes(&nodes, &spec.f, &env, opts).map_err(io_err(&nodes))?;
    let bp = dir.join("envelope_breakpoints.csv");
    emit::write_breakpoints(&bp, &env, opts).map_err(io_err(&bp))?;
    let cj = dir.join("conjugate_breakpoints.csv");
    emit::write_breakpoints(&cj, &conj, opts).map_err(io_err(&cj))?;
    Ok(ExitCode::SUCCESS)
}

fn run_oracle(
    spec: &varelax::ProblemSpec,
    opts: &SolveOptions,
    dp_steps: usize,
    dp_levels: usize,
    dir: &Path,
) -> Result<ExitCode, String> {
    let dp = dp_minimize(
        spec,
        DpGrid {
            n_t: dp_steps,
            velocity_levels: dp_levels,
        },
    )
    .map_err(|e| e.to_string())?;
    let traj = dir.join("oracle_trajectory.csv");
    emit::write_trajectory(&traj, &dp.trajectory, opts).map_err(io_err(&traj))?;
    let rep = dir.join("oracle_report.txt");
    emit::write_dp_report(&rep, &dp, dp_steps, dp_levels, opts).map_err(io_err(&rep))?;
    println!("oracle cost = {}", emit::fmt(dp.cost));
    Ok(ExitCode::SUCCESS)
}
