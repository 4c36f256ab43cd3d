//! Randomized stress of the two-dimensional lower hull and its conjugate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varelax::convex::Convex2;
use varelax::SampledFunction;

#[test]
fn random_surfaces_obey_hull_identities() {
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = rng.gen_range(0.2..2.0);
        let b = rng.gen_range(0.2..2.0);
        let cx = rng.gen_range(-0.5..0.5);
        let cy = rng.gen_range(-0.5..0.5);
        let amp = rng.gen_range(0.0..4.0);
        let f = SampledFunction::from_fn_2d((-2.0, 2.0), (-2.0, 2.0), 0.25, |x, y| {
            let r2 = a * (x - cx) * (x - cx) + b * (y - cy) * (y - cy);
            (r2 - 1.0) * (r2 - 1.0) - amp * (-(x * x + y * y)).exp() + 0.3 * x * y
        });
        let env = Convex2::envelope(&f).unwrap();

        // envelope domination at every sample, exact values at hull vertices
        for (x, z) in f.finite_points_2d() {
            assert!(env.eval(x) <= z + 1e-9, "seed {seed}: domination at {x:?}");
        }
        for &(x, z) in env.vertices() {
            assert_eq!(env.eval(x), z, "seed {seed}: vertex eval at {x:?}");
        }

        // Fenchel-Young inequality on random pairs
        for _ in 0..2000 {
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let p = [rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)];
            let e = env.eval(x);
            if e.is_finite() {
                let fy = e + env.conjugate_value(p) - (p[0] * x[0] + p[1] * x[1]);
                assert!(fy >= -1e-9, "seed {seed}: FY at {x:?}, {p:?}");
            }
        }

        // the conjugate hull reproduces the direct vertex-max on its box
        let conj = env.conjugate().unwrap();
        let (lo, hi) = env.gradient_box();
        for _ in 0..500 {
            let p = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
            let direct = env.conjugate_value(p);
            let hulled = conj.eval(p);
            if hulled.is_finite() {
                assert!(
                    (hulled - direct).abs() <= 1e-8 * (1.0 + direct.abs()),
                    "seed {seed}: conjugate at {p:?}: {hulled} vs {direct}"
                );
            }
        }
    }
}
