//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! The criteria pin the tolerances of the whole artifact: the convex-analysis
//! identities, the class verdicts, analytic solves, the duality certificate,
//! agreement with the dynamic-programming oracle on randomized non-convex
//! instances, the chattering refinement law and the non-existence signal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;
use varelax::error::{DualError, SolveError};
use varelax::oracle::{dp_minimize, DpGrid};
use varelax::{
    classify_class_f, convex_envelope, growth_profile, legendre_conjugate, solve, ConvexPiecewise,
    LinearTerm, ProblemSpec, SampledFunction, SolveOptions, SolveOutput, Verdict,
};

fn env1(f: &SampledFunction) -> varelax::convex::Convex1 {
    match convex_envelope(f).unwrap() {
        ConvexPiecewise::One(c) => c,
        _ => unreachable!(),
    }
}

fn double_well(step: f64, half_box: f64) -> SampledFunction {
    SampledFunction::from_fn_1d(-half_box, half_box, step, |x| {
        let t = x * x - 1.0;
        t * t
    })
}

#[test]
fn criterion_1_convex_analysis_identities() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(17);

    // Fenchel-Young inequality on 1e5 random pairs, for the three canonical
    // integrands; zero violations beyond 1e-9
    for f in [
        double_well(0.5, 2.0),
        SampledFunction::from_fn_1d(-2.0, 2.0, 0.25, |x| x * x),
        SampledFunction::from_fn_1d(-8.0, 8.0, 0.25, f64::abs),
    ] {
        let env = env1(&f);
        let conj = env.conjugate();
        let (xl, xh) = env.domain();
        let (pl, ph) = conj.domain();
        for _ in 0..100_000 {
            let x = rng.gen_range(xl..=xh);
            let p = rng.gen_range(pl..=ph);
            let lhs = env.eval(x) + conj.eval(p);
            assert!(
                lhs >= p * x - 1e-9,
                "FY violated at x={x}, p={p}: {lhs} vs {}",
                p * x
            );
        }

        // biconjugation identity at all breakpoints
        let back = conj.conjugate();
        for (x, y) in env.breakpoints() {
            assert!((back.eval(x) - y).abs() <= 1e-9, "biconjugation at {x}");
        }

        // envelope idempotence: exact at grid nodes
        let axis = f.axis(0);
        let resampled = SampledFunction::from_fn_1d(axis.lo, axis.hi, axis.step, |x| env.eval(x));
        let env2 = env1(&resampled);
        for x in axis.nodes() {
            assert_eq!(env2.eval(x), env.eval(x), "idempotence at {x}");
        }
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "runtime {elapsed:?} exceeds 5 s"
    );
    println!("[PASS] criterion 1: Fenchel-Young, biconjugation, idempotence ({elapsed:?})");
}

#[test]
fn criterion_2_class_membership_verdicts() {
    let shells = [0.0, 2.0, 4.0, 6.0];
    for step in [0.25, 0.2, 0.125, 0.1, 0.0625] {
        for (name, f, expected) in [
            (
                "x^2",
                SampledFunction::from_fn_1d(-8.0, 8.0, step, |x| x * x),
                Verdict::InClassF,
            ),
            (
                "|x|",
                SampledFunction::from_fn_1d(-8.0, 8.0, step, f64::abs),
                Verdict::NotInClassF,
            ),
            ("(x^2-1)^2", double_well(step, 8.0), Verdict::InClassF),
        ] {
            let start = Instant::now();
            let env = convex_envelope(&f).unwrap();
            let profile = growth_profile(&env, &shells);
            let verdict = classify_class_f(&profile, -10.0, 3);
            let elapsed = start.elapsed();
            assert_eq!(verdict, expected, "{name} at step {step}");
            assert!(elapsed.as_secs_f64() < 1.0, "{name} took {elapsed:?}");
        }
    }
    println!("[PASS] criterion 2: class verdicts for x^2, |x|, double well at steps <= 0.25");
}

fn solve_quadratic_line() -> SolveOutput {
    let f = SampledFunction::from_fn_1d(-2.0, 2.0, 0.25, |x| x * x);
    let spec = ProblemSpec::new(1.0, vec![0.0], vec![1.0], LinearTerm::zero(1), f).unwrap();
    solve(&spec, &SolveOptions::default()).unwrap()
}

fn solve_double_well() -> SolveOutput {
    let spec = ProblemSpec::new(
        1.0,
        vec![0.0],
        vec![0.0],
        LinearTerm::zero(1),
        double_well(0.5, 2.0),
    )
    .unwrap();
    solve(&spec, &SolveOptions::default()).unwrap()
}

#[test]
fn criterion_3_analytic_solves() {
    let start = Instant::now();
    let out = solve_quadratic_line();
    assert!(
        (out.report.cost_f - 1.0).abs() <= 1e-4,
        "cost_f = {}",
        out.report.cost_f
    );
    let mut sup: f64 = 0.0;
    for i in 0..=1000 {
        let t = i as f64 / 1000.0;
        sup = sup.max((out.trajectory.u_at(0, t) - t).abs());
    }
    assert!(sup <= 1e-4, "sup |u(t) - t| = {sup}");
    let el1 = start.elapsed();
    assert!(el1.as_secs_f64() < 2.0);

    let start = Instant::now();
    let out = solve_double_well();
    assert!(
        out.report.cost_f.abs() <= 1e-4,
        "cost_f = {}",
        out.report.cost_f
    );
    let has_pos = out.trajectory.v.iter().any(|&v| (v - 1.0).abs() <= 1e-12);
    let has_neg = out.trajectory.v.iter().any(|&v| (v + 1.0).abs() <= 1e-12);
    assert!(
        has_pos && has_neg,
        "chattering must take both values -1 and +1"
    );
    let el2 = start.elapsed();
    assert!(el2.as_secs_f64() < 2.0);
    println!("[PASS] criterion 3: analytic solves ({el1:?}, {el2:?})");
}

/// A randomized non-convex instance: degree-6 polynomial minus a compactly
/// supported quartic bump, a random piecewise-linear linear term, random
/// endpoints with |Δu/T| at most half the velocity box.
fn random_instance(rng: &mut ChaCha8Rng) -> ProblemSpec {
    let c6 = rng.gen_range(1.0..2.0);
    let coeffs: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let amp = rng.gen_range(2.0..5.0);
    let center = rng.gen_range(-1.0..1.0);
    let radius = rng.gen_range(0.4..0.8);
    let f = SampledFunction::from_fn_1d(-2.0, 2.0, 0.25, move |x| {
        let mut poly = c6;
        for k in (0..6).rev() {
            poly = poly * x + coeffs[k];
        }
        // poly = c0 + c1 x + ... + c6 x^6 via Horner from the top
        let d = radius * radius - (x - center) * (x - center);
        let bump = if d > 0.0 {
            amp * d * d / (radius * radius * radius * radius)
        } else {
            0.0
        };
        poly - bump
    });
    let a_samples: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.gen_range(-1.5..1.5)]).collect();
    let u0 = rng.gen_range(-0.5..0.5);
    let du = rng.gen_range(-1.0..1.0);
    ProblemSpec::new(
        1.0,
        vec![u0],
        vec![u0 + du],
        LinearTerm::Samples { values: a_samples },
        f,
    )
    .unwrap()
}

/// Quantization allowance for solver-versus-oracle agreement: the oracle's
/// own half-cell displacement slack, one velocity level of integrand
/// steepness over the horizon, and the drift of B across one DP step.
fn oracle_allowance(spec: &ProblemSpec, dp_slack: f64, grid: DpGrid) -> f64 {
    let pts = spec.f.finite_points_1d();
    let slope_max = pts
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .fold(0.0, f64::max);
    let axis = spec.f.axis(0);
    let dv = (axis.hi - axis.lo) / (grid.velocity_levels - 1) as f64;
    let dt = spec.horizon / grid.n_t as f64;
    let a_max = (0..64)
        .map(|i| {
            spec.linear
                .eval(0, spec.horizon * i as f64 / 63.0, spec.horizon)
                .abs()
        })
        .fold(0.0, f64::max);
    dp_slack + slope_max * dv * spec.horizon + a_max * dt * (axis.hi - axis.lo)
}

#[test]
fn criterion_5_oracle_equivalence_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grid = DpGrid {
        n_t: 200,
        velocity_levels: 401,
    };
    for instance in 0..10 {
        let start = Instant::now();
        let spec = random_instance(&mut rng);
        let out = solve(&spec, &SolveOptions::default())
            .unwrap_or_else(|e| panic!("instance {instance} failed to solve: {e}"));
        let dp = dp_minimize(&spec, grid).unwrap();
        let allowance = oracle_allowance(&spec, dp.cost_slack, grid);
        let tol = 0.02 * (1.0 + dp.cost.abs()) + allowance;
        let diff = (out.report.cost_f - dp.cost).abs();
        assert!(
            diff <= tol,
            "instance {instance}: solver {} vs oracle {} (diff {diff}, tol {tol})",
            out.report.cost_f,
            dp.cost
        );
        // oracle dominance: the certified trajectory is never worse
        assert!(
            out.report.cost_f <= dp.cost + allowance + 1e-9,
            "instance {instance}"
        );
        let elapsed = start.elapsed();
        assert!(
            elapsed.as_secs_f64() < 10.0,
            "instance {instance} took {elapsed:?}"
        );
    }
    println!("[PASS] criterion 5: oracle agreement on 10 randomized instances");
}

#[test]
fn criterion_4_duality_certificate_on_every_solve() {
    let mut outputs: Vec<(String, SolveOutput)> = vec![
        ("quadratic line".into(), solve_quadratic_line()),
        ("double well".into(), solve_double_well()),
    ];
    // quadratic with constant drift
    let f = SampledFunction::from_fn_1d(-2.0, 2.0, 0.01, |x| x * x);
    let spec = ProblemSpec::new(
        1.0,
        vec![0.0],
        vec![0.0],
        LinearTerm::constant(vec![1.0]),
        f,
    )
    .unwrap();
    outputs.push((
        "quadratic with drift".into(),
        solve(&spec, &SolveOptions::default()).unwrap(),
    ));
    // double well with asymmetric target
    let spec = ProblemSpec::new(
        1.0,
        vec![0.0],
        vec![0.5],
        LinearTerm::zero(1),
        double_well(0.5, 2.0),
    )
    .unwrap();
    outputs.push((
        "double well du=0.5".into(),
        solve(&spec, &SolveOptions::default()).unwrap(),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..10 {
        let spec = random_instance(&mut rng);
        outputs.push((
            format!("random {i}"),
            solve(&spec, &SolveOptions::default()).unwrap(),
        ));
    }
    for (name, out) in &outputs {
        let r = &out.report;
        let slack = 1e-4 * (1.0 + r.dual_value.abs());
        assert!(
            r.cost_f - r.dual_value <= slack,
            "{name}: cost_f {} vs dual {} exceeds {slack}",
            r.cost_f,
            r.dual_value
        );
        assert!(r.is_minimizer, "{name}: certificate flag");
    }
    println!(
        "[PASS] criterion 4: duality certificate on {} solves",
        outputs.len()
    );
}

#[test]
fn criterion_6_chattering_refinement() {
    let spec = ProblemSpec::new(
        1.0,
        vec![0.0],
        vec![0.0],
        LinearTerm::zero(1),
        double_well(0.5, 2.0),
    )
    .unwrap();
    let mut deviations = Vec::new();
    for n in [1usize, 2, 4, 8] {
        let opts = SolveOptions {
            n_chatter: n,
            ..Default::default()
        };
        let out = solve(&spec, &opts).unwrap();
        assert!(out.report.cost_f.abs() <= 1e-4, "n_chatter = {n}");
        let sup = out
            .trajectory
            .times
            .iter()
            .map(|&t| (out.trajectory.u_at(0, t) - out.relaxed_traj.u_at(0, t)).abs())
            .fold(0.0, f64::max);
        deviations.push(sup);
    }
    for w in deviations.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (1.6..=2.4).contains(&ratio),
            "deviation must halve when n_chatter doubles: {deviations:?}"
        );
    }
    println!("[PASS] criterion 6: deviation halves per doubling {deviations:?}");
}

#[test]
fn criterion_7_non_existence_signaling() {
    // library level: NotInClassF verdict and an unattained dual
    let f = SampledFunction::from_fn_1d(-8.0, 8.0, 0.25, f64::abs);
    let env = convex_envelope(&f).unwrap();
    let profile = growth_profile(&env, &[0.0, 2.0, 4.0, 6.0]);
    assert_eq!(classify_class_f(&profile, -10.0, 3), Verdict::NotInClassF);
    let spec = ProblemSpec::new(
        1.0,
        vec![0.0],
        vec![0.0],
        LinearTerm::constant(vec![3.0]),
        f,
    )
    .unwrap();
    match solve(&spec, &SolveOptions::default()) {
        Err(SolveError::Dual(DualError::NoMinimizer { verdict, .. })) => {
            assert_eq!(verdict, Verdict::NotInClassF);
        }
        other => panic!("expected NoMinimizer, got {other:?}"),
    }

    // process level: exit code 2, no spurious trajectory
    let problems: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems");
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_varelax"))
        .args([
            "solve",
            problems.join("absolute_value.toml").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        !dir.path().join("trajectory.csv").exists(),
        "no trajectory on failure"
    );
    println!("[PASS] criterion 7: non-existence exits with NoMinimizer (code 2)");
}

// the conjugate's self-duality example doubles as a sanity check that the
// acceptance harness exercises the same API the CLI uses
#[test]
fn acceptance_harness_sanity() {
    let f = SampledFunction::from_fn_1d(-2.0, 2.0, 0.01, |x| 0.5 * x * x);
    let env = convex_envelope(&f).unwrap();
    let conj = legendre_conjugate(&env).unwrap();
    let c1 = conj.as_one().unwrap();
    let (lo, hi) = c1.domain();
    let mut p = lo.max(-1.9);
    while p <= hi.min(1.9) {
        assert!((c1.eval(p) - 0.5 * p * p).abs() <= 0.01);
        p += 0.37;
    }
}
