//! Exact piecewise-affine convex analysis in one dimension.
//!
//! `Convex1` stores a convex piecewise-affine function by its breakpoints.
//! The convex envelope of sampled data, the Fenchel conjugate, set-valued
//! subdifferentials and the decomposition of envelope points into touching
//! epigraph points are all computed exactly on breakpoints, with no dense
//! re-sampling.

use crate::error::ConvexError;
use crate::grid::SampledFunction;

/// Convex piecewise-affine function on a bounded interval.
///
/// Breakpoints `xs[0] < xs[1] < ...` with values `ys`; successive chord
/// slopes are non-decreasing. Evaluation returns +∞ outside `[xs[0], xs[k]]`
/// and the stored value exactly at breakpoints.
#[derive(Debug, Clone)]
pub struct Convex1 {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Chord slope of piece i = (xs[i], xs[i+1]); cached at construction.
    slopes: Vec<f64>,
}

/// Exposed face of a convex function at a supporting slope: the set of
/// maximizers of `p·x - g(x)`, an interval (possibly a singleton).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face1 {
    pub lo: f64,
    pub hi: f64,
    /// The supporting slope at which this face is exposed.
    pub slope: f64,
}

impl Face1 {
    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Convex combination of epigraph points realizing an envelope value:
/// points `xi` where the envelope touches the sampled function, with weights
/// `lambda` reproducing the represented point and its envelope value.
#[derive(Debug, Clone)]
pub struct Combo1 {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub represented: f64,
}

impl Convex1 {
    /// Wraps explicit breakpoints. Checks strict x-ordering and convexity
    /// (non-decreasing chord slopes).
    pub fn from_breakpoints(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, String> {
        let slopes: Vec<f64> = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect();
        Self::with_slopes(xs, ys, slopes)
    }

    /// Like [`Convex1::from_breakpoints`] but with the piece slopes given
    /// explicitly. The conjugate knows its gradients exactly (they are
    /// breakpoints of the pre-conjugate function); re-deriving them from
    /// values would amplify rounding across the short boundary pieces.
    fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, slopes: Vec<f64>) -> Result<Self, String> {
        if xs.len() != ys.len() || xs.is_empty() || slopes.len() + 1 != xs.len() {
            return Err("breakpoint lists must be non-empty and consistent".into());
        }
        if xs.iter().any(|x| x.is_nan()) || xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err("breakpoints must be strictly increasing".into());
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err("breakpoint values must be finite".into());
        }
        if slopes
            .windows(2)
            .any(|s| s[0] > s[1] + 1e-12 * (1.0 + s[0].abs()))
        {
            return Err("chord slopes must be non-decreasing (not convex)".into());
        }
        Ok(Convex1 { xs, ys, slopes })
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Chord slopes of the affine pieces, non-decreasing.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Slope box of the conjugate: the range of chord slopes.
    pub fn slope_range(&self) -> (f64, f64) {
        if self.slopes.is_empty() {
            (0.0, 0.0)
        } else {
            (self.slopes[0], *self.slopes.last().unwrap())
        }
    }

    /// Evaluates the function; +∞ outside the domain, exact at breakpoints.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.xs.len();
        if x < self.xs[0] || x > self.xs[k - 1] {
            return f64::INFINITY;
        }
        match self.xs.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => self.ys[i],
            Err(i) => {
                // xs[i-1] < x < xs[i]
                let (xa, ya) = (self.xs[i - 1], self.ys[i - 1]);
                ya + (x - xa) * self.slopes[i - 1]
            }
        }
    }

    /// Lower convex envelope (biconjugate) of the finite samples: the lower
    /// hull of the sample points, restricted to the box.
    ///
    /// Exactly collinear or nearly collinear interior samples are absorbed
    /// into their chord, so breakpoints are the hull vertices, each carrying
    /// its original sample value. Nearly collinear means a relative deviation
    /// below ~1e-12, which keeps re-hulling of interpolated envelope values
    /// stable.
    pub fn envelope(f: &SampledFunction) -> Result<Self, ConvexError> {
        assert_eq!(f.dim(), 1, "envelope (dim 1) requires 1-d samples");
        f.require_finite(2)?;
        let pts = f.finite_points_1d();
        Ok(Self::lower_hull(&pts))
    }

    /// Monotone-chain lower hull of points already sorted by x.
    pub(crate) fn lower_hull(pts: &[(f64, f64)]) -> Self {
        debug_assert!(pts.windows(2).all(|w| w[0].0 < w[1].0));
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for &p in pts {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                // cross > 0 iff b lies strictly below the chord a-p; anything
                // on or (within rounding) above the chord is absorbed
                let cross = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
                let scale = (p.0 - a.0) * (1.0 + a.1.abs().max(b.1.abs()).max(p.1.abs()));
                if cross <= 1e-12 * scale {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        let (xs, ys) = hull.into_iter().unzip();
        Convex1::from_breakpoints(xs, ys).expect("hull output is convex by construction")
    }

    /// Fenchel conjugate `f*(p) = sup_x [p·x - g(x)]`, exact on piecewise
    /// affine data: breakpoints of the conjugate are the chord slopes of `g`
    /// and its chord slopes are the breakpoints of `g`.
    ///
    /// The conjugate is represented on the slope box of `g`, padded by a
    /// relative 1e-9 sliver on each side. Beyond that, evaluation would
    /// depend on the artificial sampling box of the original data, so it is
    /// treated as out of domain; the sliver keeps the tails' gradients (the
    /// domain endpoints of `g`) in the representation, which makes
    /// biconjugation exact at every breakpoint of `g`. A single-point or
    /// single-piece `g` has a degenerate slope box and is widened by
    /// `1 + |s|` instead.
    pub fn conjugate(&self) -> Convex1 {
        // dedup equal-slope runs, tracking the right end of each run: that
        // breakpoint is the conjugate's gradient just above the run's slope
        let mut ps: Vec<f64> = Vec::with_capacity(self.slopes.len() + 2);
        let mut right_x: Vec<f64> = Vec::with_capacity(self.slopes.len());
        for (i, &s) in self.slopes.iter().enumerate() {
            if ps.last().is_none_or(|&last| s > last) {
                ps.push(s);
                right_x.push(self.xs[i + 1]);
            } else {
                *right_x.last_mut().unwrap() = self.xs[i + 1];
            }
        }
        if ps.is_empty() {
            // conjugate of a single point is affine
            let x0 = self.xs[0];
            let pad = 1.0 + x0.abs();
            let ps = vec![-pad, pad];
            let ys = ps.iter().map(|&p| self.conjugate_value(p)).collect();
            return Convex1::with_slopes(ps, ys, vec![x0]).expect("affine conjugate");
        }
        let pad = if ps.len() == 1 {
            // single affine piece: widen so the kink is interior
            1.0 + ps[0].abs()
        } else {
            1e-9 * (1.0 + ps[ps.len() - 1] - ps[0])
        };
        let mut xs = Vec::with_capacity(ps.len() + 2);
        xs.push(ps[0] - pad);
        xs.extend_from_slice(&ps);
        xs.push(ps[ps.len() - 1] + pad);
        // gradients: the left tail exposes the first breakpoint, each slope
        // run's upper side exposes its right end
        let mut grads = Vec::with_capacity(xs.len() - 1);
        grads.push(self.xs[0]);
        grads.extend_from_slice(&right_x);
        let ys: Vec<f64> = xs.iter().map(|&p| self.conjugate_value(p)).collect();
        Convex1::with_slopes(xs, ys, grads).expect("conjugate of convex data is convex")
    }

    /// Direct conjugate value `max_i (p·x_i - y_i)` over breakpoints; finite
    /// for every `p` because the domain is bounded.
    pub fn conjugate_value(&self, p: f64) -> f64 {
        self.xs
            .iter()
            .zip(&self.ys)
            .map(|(&x, &y)| p * x - y)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exposed face at slope `p`: `argmax_x [p·x - g(x)]` over the domain.
    /// A singleton where the touching point is a kink of `g`, an interval
    /// across a piece of slope `p`, and a box endpoint when `p` lies outside
    /// the slope range.
    pub fn face(&self, p: f64) -> Face1 {
        let k = self.xs.len();
        if self.slopes.is_empty() {
            return Face1 {
                lo: self.xs[0],
                hi: self.xs[0],
                slope: p,
            };
        }
        let tol = 1e-12 * (1.0 + p.abs());
        // first piece with slope > p + tol bounds the face on the right;
        // last piece with slope < p - tol bounds it on the left.
        let right = self.slopes.partition_point(|&s| s <= p + tol);
        let left = self.slopes.partition_point(|&s| s < p - tol);
        // pieces in [left, right) have slope ~ p; face spans their breakpoints
        let lo = self.xs[left.min(k - 1)];
        let hi = self.xs[right.min(k - 1)];
        Face1 { lo, hi, slope: p }
    }

    /// Decomposes an envelope point into touching epigraph points of the
    /// sampled data: returns points where the envelope equals `f` with convex
    /// weights reproducing `x̄` and the envelope value there. When the
    /// envelope already touches `f` at `x̄` (within `tol_touch`), the combo is
    /// the singleton `{(x̄, 1)}`; otherwise the bracketing breakpoints of the
    /// containing piece give the minimal-diameter face.
    pub fn caratheodory(
        &self,
        f: &SampledFunction,
        x_bar: f64,
        tol_touch: f64,
    ) -> Result<Combo1, ConvexError> {
        let (lo, hi) = self.domain();
        if !(x_bar >= lo && x_bar <= hi) {
            return Err(ConvexError::DecompositionFailure {
                point: vec![x_bar],
                reason: "point outside envelope domain".into(),
            });
        }
        let env_val = self.eval(x_bar);
        let f_val = f.interp_1d(x_bar);
        if f_val.is_finite() && (f_val - env_val).abs() <= tol_touch {
            return Ok(Combo1 {
                points: vec![x_bar],
                weights: vec![1.0],
                represented: x_bar,
            });
        }
        // containing piece; x_bar equal to a breakpoint would have touched
        let i = match self.xs.binary_search_by(|b| b.total_cmp(&x_bar)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i - 1,
        };
        let (xa, xb) = (self.xs[i], self.xs[i + 1]);
        for x in [xa, xb] {
            let fv = f.interp_1d(x);
            if !fv.is_finite() || (fv - self.eval(x)).abs() > tol_touch {
                return Err(ConvexError::DecompositionFailure {
                    point: vec![x_bar],
                    reason: format!("piece endpoint {x} does not touch the sampled function"),
                });
            }
        }
        let t = (x_bar - xa) / (xb - xa);
        Ok(Combo1 {
            points: vec![xa, xb],
            weights: vec![1.0 - t, t],
            represented: x_bar,
        })
    }
}
