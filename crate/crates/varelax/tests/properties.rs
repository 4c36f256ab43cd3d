//! Property tests for the structural invariants of the convex-analysis layer
//! and the solver pipeline.

use proptest::prelude::*;
use varelax::convex::Convex1;
use varelax::{accumulate, solve, LinearTerm, ProblemSpec, SampledFunction, SolveOptions};

/// Random sampled integrand on [-2, 2]: uniform node count, bounded values,
/// occasionally +inf holes (never enough to degenerate).
fn sampled_fn() -> impl Strategy<Value = SampledFunction> {
    (4usize..24, proptest::collection::vec(-10.0f64..10.0, 25)).prop_map(|(intervals, raw)| {
        let step = 4.0 / intervals as f64;
        let vals: Vec<f64> = (0..=intervals).map(|i| raw[i % raw.len()]).collect();
        SampledFunction::from_values_1d(-2.0, -2.0 + step * intervals as f64, step, vals).unwrap()
    })
}

proptest! {
    #[test]
    fn envelope_dominates_and_is_idempotent(f in sampled_fn()) {
        let env = Convex1::envelope(&f).unwrap();
        for (x, y) in f.finite_points_1d() {
            prop_assert!(env.eval(x) <= y, "domination at {x}");
        }
        // convexity: chord slopes non-decreasing
        let s = env.slopes();
        prop_assert!(s.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        // idempotence on the resampled envelope
        let axis = f.axis(0);
        let res = SampledFunction::from_fn_1d(axis.lo, axis.hi, axis.step, |x| env.eval(x));
        let env2 = Convex1::envelope(&res).unwrap();
        for x in axis.nodes() {
            prop_assert_eq!(env2.eval(x), env.eval(x));
        }
    }

    #[test]
    fn fenchel_young_holds_everywhere(f in sampled_fn(), x in -2.0f64..2.0, t in 0.0f64..1.0) {
        let env = Convex1::envelope(&f).unwrap();
        let conj = env.conjugate();
        let (pl, ph) = conj.domain();
        let p = pl + t * (ph - pl);
        let (xl, xh) = env.domain();
        let x = x.clamp(xl, xh);
        prop_assert!(env.eval(x) + conj.eval(p) >= p * x - 1e-9);
    }

    #[test]
    fn biconjugation_fixes_breakpoints(f in sampled_fn()) {
        let env = Convex1::envelope(&f).unwrap();
        let back = env.conjugate().conjugate();
        for (x, y) in env.breakpoints() {
            prop_assert!((back.eval(x) - y).abs() <= 1e-9, "at {x}: {} vs {y}", back.eval(x));
        }
    }

    #[test]
    fn faces_are_monotone_and_tight(f in sampled_fn(), p1 in -30.0f64..30.0, p2 in -30.0f64..30.0) {
        let env = Convex1::envelope(&f).unwrap();
        let (lo, hi) = (p1.min(p2), p1.max(p2));
        let f_lo = env.face(lo);
        let f_hi = env.face(hi);
        prop_assert!(f_lo.hi <= f_hi.lo + 1e-12 || lo == hi);
        // inside the slope box every face point attains the conjugate value
        let conj = env.conjugate();
        let (pl, ph) = conj.domain();
        for face in [f_lo, f_hi] {
            let p = face.slope;
            if p < pl || p > ph {
                // beyond the chord slopes the box endpoint is exposed
                let (xl, xh) = env.domain();
                let expect = if p < pl { xl } else { xh };
                prop_assert_eq!((face.lo, face.hi), (expect, expect));
                continue;
            }
            let fs = conj.eval(p);
            for x in [face.lo, face.hi] {
                let direct = p * x - env.eval(x);
                prop_assert!((direct - fs).abs() <= 1e-8 * (1.0 + fs.abs()));
            }
        }
    }

    #[test]
    fn caratheodory_combos_are_consistent(f in sampled_fn(), t in 0.0f64..1.0) {
        let env = Convex1::envelope(&f).unwrap();
        let (lo, hi) = env.domain();
        let x = lo + t * (hi - lo);
        let combo = env.caratheodory(&f, x, 1e-8).unwrap();
        prop_assert!(combo.points.len() <= 3);
        let wsum: f64 = combo.weights.iter().sum();
        prop_assert!((wsum - 1.0).abs() <= 1e-12);
        let xr: f64 = combo.points.iter().zip(&combo.weights).map(|(p, w)| p * w).sum();
        prop_assert!((xr - x).abs() <= 1e-8);
        let vr: f64 = combo
            .points
            .iter()
            .zip(&combo.weights)
            .map(|(p, w)| f.interp_1d(*p) * w)
            .sum();
        prop_assert!((vr - env.eval(x)).abs() <= 1e-8);
        for p in &combo.points {
            prop_assert!((f.interp_1d(*p) - env.eval(*p)).abs() <= 1e-8);
        }
    }

    #[test]
    fn accumulated_term_is_exact_antiderivative(samples in proptest::collection::vec(-3.0f64..3.0, 2..7)) {
        let f = SampledFunction::from_fn_1d(-1.0, 1.0, 0.5, |x| x * x);
        let linear = LinearTerm::Samples { values: samples.iter().map(|&a| vec![a]).collect() };
        let spec = ProblemSpec::new(2.0, vec![0.0], vec![0.0], linear.clone(), f).unwrap();
        let b = accumulate(&spec, 513);
        prop_assert_eq!(b.node1(512), 0.0);
        for i in (1..512).step_by(37) {
            let dt = b.times[i + 1] - b.times[i - 1];
            let db = (b.node1(i + 1) - b.node1(i - 1)) / dt;
            let at = linear.eval(0, b.times[i], 2.0);
            prop_assert!((db + at).abs() <= 1e-6 * (1.0 + at.abs()), "node {i}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Full-pipeline invariants on random double-well-like instances: the
    /// endpoint constraint is preserved through chattering, the trajectory
    /// cost dominates the envelope cost, and the certificate holds.
    #[test]
    fn pipeline_preserves_endpoints_and_certificates(
        depth in 0.2f64..3.0,
        du in -0.8f64..0.8,
        drift in -0.8f64..0.8,
        n_chatter in 1usize..12,
    ) {
        let f = SampledFunction::from_fn_1d(-2.0, 2.0, 0.25, move |x| {
            let t = x * x - 1.0;
            depth * t * t
        });
        let spec = ProblemSpec::new(
            1.0,
            vec![0.0],
            vec![du],
            LinearTerm::constant(vec![drift]),
            f,
        )
        .unwrap();
        let opts = SolveOptions { n_chatter, ..Default::default() };
        let out = solve(&spec, &opts).unwrap();
        let r = &out.report;
        prop_assert!(r.endpoint_residual <= 1e-8 * (1.0 + du.abs()));
        prop_assert!(r.cost_f >= r.cost_env - 1e-9 * (1.0 + r.cost_env.abs()));
        prop_assert!(r.duality_gap.abs() <= r.tol_gap);
        prop_assert!(r.gap <= r.tol_cert, "recovery gap {} vs {}", r.gap, r.tol_cert);
        // the relaxed selection obeys the constraint by construction
        let w: Vec<f64> = out.relaxed.times.windows(2).map(|t| t[1] - t[0]).collect();
        let integral: f64 = (0..w.len())
            .map(|j| 0.5 * (out.relaxed.v[j] + out.relaxed.v[j + 1]) * w[j])
            .sum();
        prop_assert!((integral - du).abs() <= 1e-8 * (1.0 + du.abs()));
    }
}
