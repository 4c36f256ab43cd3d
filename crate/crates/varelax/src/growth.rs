//! Growth check on the convexified integrand.
//!
//! Decides (numerically, on the truncated representation) whether
//! `f**(x) - x·∇f**(x) → -∞` as `|x| → ∞` along differentiability points of
//! `f**`. The quantity is constant on each affine piece (it is the tangent
//! intercept, equivalently `-f*(∇f**)`), so shells of radii collect the
//! per-piece values of every piece whose `|x|`-range intersects them. The
//! verdict is three-valued: a box can refute or support the growth property
//! but not prove the asymptotic claim.

use crate::convex::ConvexPiecewise;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    InClassF,
    NotInClassF,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::InClassF => write!(f, "InClassF"),
            Verdict::NotInClassF => write!(f, "NotInClassF"),
            Verdict::Inconclusive => write!(f, "Inconclusive"),
        }
    }
}

/// One radial shell `[radius, next)` with the maximum of
/// `f**(x) - x·∇f**(x)` over affine pieces intersecting it.
#[derive(Debug, Clone)]
pub struct ShellEntry {
    pub radius: f64,
    /// `None` records an empty shell (no differentiability point in range).
    pub g_max: Option<f64>,
    pub pieces: usize,
}

#[derive(Debug, Clone)]
pub struct GrowthProfile {
    pub shells: Vec<ShellEntry>,
    pub verdict: Verdict,
    /// Least-squares slope of the profile tail, as a divergence-rate estimate.
    pub divergence_slope: f64,
    /// Max discrepancy between the tangent-intercept and `-f*(∇f**)` routes.
    pub cross_check_error: f64,
}

/// Default threshold: scale-aware and conservative.
pub fn default_threshold(env: &ConvexPiecewise) -> f64 {
    let range = match env {
        ConvexPiecewise::One(c) => {
            let (lo, hi) = c
                .ys()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &y| {
                    (l.min(y), h.max(y))
                });
            (hi - lo).max(0.0)
        }
        ConvexPiecewise::Two(c) => {
            let (lo, hi) = c
                .vertices()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &(_, z)| {
                    (l.min(z), h.max(z))
                });
            (hi - lo).max(0.0)
        }
    };
    -10.0 * range
}

pub const DEFAULT_MIN_DECREASE_SHELLS: usize = 3;

/// Default shells: four equal radius bands from 0 to the box corner.
pub fn default_shells(env: &ConvexPiecewise) -> Vec<f64> {
    let rmax = match env {
        ConvexPiecewise::One(c) => {
            let (lo, hi) = c.domain();
            lo.abs().max(hi.abs())
        }
        ConvexPiecewise::Two(c) => c
            .vertices()
            .iter()
            .map(|(x, _)| (x[0] * x[0] + x[1] * x[1]).sqrt())
            .fold(0.0, f64::max),
    };
    (0..4).map(|i| rmax * i as f64 / 4.0).collect()
}

/// Affine piece of the envelope with the data the growth check needs.
struct Piece {
    /// `f** - x·∇f**` on the piece: the tangent intercept, a constant.
    g_value: f64,
    /// Cross-check via the conjugate: `-f*(∇f**)`.
    g_check: f64,
    r_lo: f64,
    r_hi: f64,
}

fn pieces_of(env: &ConvexPiecewise) -> Vec<Piece> {
    match env {
        ConvexPiecewise::One(c) => {
            let xs = c.xs();
            let ys = c.ys();
            c.slopes()
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    let (xa, xb) = (xs[i], xs[i + 1]);
                    let r_lo = if xa <= 0.0 && xb >= 0.0 {
                        0.0
                    } else {
                        xa.abs().min(xb.abs())
                    };
                    Piece {
                        g_value: ys[i] - xa * s,
                        g_check: -c.conjugate_value(s),
                        r_lo,
                        r_hi: xa.abs().max(xb.abs()),
                    }
                })
                .collect()
        }
        ConvexPiecewise::Two(c) => c
            .facets()
            .iter()
            .map(|fc| {
                let tri: Vec<[f64; 2]> = fc.tri.iter().map(|&i| c.vertices()[i].0).collect();
                Piece {
                    g_value: fc.offset,
                    g_check: -c.conjugate_value(fc.grad),
                    r_lo: distance_origin_to_triangle(&tri),
                    r_hi: tri
                        .iter()
                        .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
                        .fold(0.0, f64::max),
                }
            })
            .collect(),
    }
}

fn distance_origin_to_triangle(t: &[[f64; 2]]) -> f64 {
    // inside test via signs of edge cross products
    let cross = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
    let signs: Vec<f64> = (0..3)
        .map(|i| {
            let a = t[i];
            let b = t[(i + 1) % 3];
            cross([b[0] - a[0], b[1] - a[1]], [-a[0], -a[1]])
        })
        .collect();
    if signs.iter().all(|&s| s >= 0.0) || signs.iter().all(|&s| s <= 0.0) {
        return 0.0;
    }
    (0..3)
        .map(|i| distance_origin_to_segment(t[i], t[(i + 1) % 3]))
        .fold(f64::INFINITY, f64::min)
}

fn distance_origin_to_segment(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (-(a[0] * d[0] + a[1] * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let p = [a[0] + t * d[0], a[1] + t * d[1]];
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}

/// Evaluates the growth diagnostic per shell. `shells` are the left edges of
/// the radius bands, strictly increasing; the last band extends to the box
/// boundary. The verdict is computed with the default threshold; use
/// [`classify_class_f`] to re-classify under explicit parameters.
pub fn growth_profile(env: &ConvexPiecewise, shells: &[f64]) -> GrowthProfile {
    assert!(!shells.is_empty(), "need at least one shell radius");
    assert!(
        shells.windows(2).all(|w| w[0] < w[1]),
        "shell radii must be strictly increasing"
    );
    let pieces = pieces_of(env);
    let mut entries = Vec::with_capacity(shells.len());
    let mut cross_err: f64 = 0.0;
    for (k, &r) in shells.iter().enumerate() {
        let r_next = shells.get(k + 1).copied().unwrap_or(f64::INFINITY);
        let mut g_max = f64::NEG_INFINITY;
        let mut n = 0usize;
        for p in &pieces {
            if p.r_lo < r_next && p.r_hi >= r {
                g_max = g_max.max(p.g_value);
                n += 1;
                cross_err = cross_err.max((p.g_value - p.g_check).abs());
            }
        }
        entries.push(ShellEntry {
            radius: r,
            g_max: if n > 0 { Some(g_max) } else { None },
            pieces: n,
        });
    }
    let (verdict, slope) = classify_entries(
        &entries,
        default_threshold(env),
        DEFAULT_MIN_DECREASE_SHELLS,
    );
    GrowthProfile {
        shells: entries,
        verdict,
        divergence_slope: slope,
        cross_check_error: cross_err,
    }
}

/// Deterministic classification rule: in the growth class iff the last
/// `min_decrease_shells` values are strictly decreasing and the final value
/// is below `threshold`; not in the class iff the tail is flat (bounded below
/// by its fitted constant within tolerance); otherwise inconclusive.
pub fn classify_class_f(
    profile: &GrowthProfile,
    threshold: f64,
    min_decrease_shells: usize,
) -> Verdict {
    classify_entries(&profile.shells, threshold, min_decrease_shells).0
}

fn classify_entries(
    entries: &[ShellEntry],
    threshold: f64,
    min_decrease_shells: usize,
) -> (Verdict, f64) {
    let vals: Vec<(f64, f64)> = entries
        .iter()
        .filter_map(|e| e.g_max.map(|g| (e.radius, g)))
        .collect();
    if vals.is_empty() {
        return (Verdict::Inconclusive, 0.0);
    }
    let w = min_decrease_shells.max(1).min(vals.len());
    let tail = &vals[vals.len() - w..];
    let slope = least_squares_slope(tail);
    let strictly_decreasing = tail.len() >= 2 && tail.windows(2).all(|p| p[1].1 < p[0].1);
    let last = tail.last().unwrap().1;
    if strictly_decreasing && last < threshold {
        return (Verdict::InClassF, slope);
    }
    let mean = tail.iter().map(|p| p.1).sum::<f64>() / tail.len() as f64;
    let spread = tail.iter().map(|p| (p.1 - mean).abs()).fold(0.0, f64::max);
    if spread <= 1e-8 * (1.0 + mean.abs()) {
        return (Verdict::NotInClassF, slope);
    }
    (Verdict::Inconclusive, slope)
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}
