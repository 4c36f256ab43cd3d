//! Sampled integrands on uniform grids.
//!
//! A [`SampledFunction`] is a possibly non-convex integrand f: ℝᵐ → ℝ ∪ {+∞}
//! given by its values on a bounded uniform grid (m ∈ {1, 2}). The value
//! `f64::INFINITY` marks points outside dom f and never participates in
//! arithmetic; everything outside the box is treated as +∞.

use crate::error::ConvexError;

/// One coordinate axis of the sampling grid: `count` nodes from `lo` to `hi`
/// with uniform spacing `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    /// Builds an axis on `[lo, hi]` with spacing `step`. `(hi - lo)` must be
    /// an (approximate) integer multiple of `step`; the stored `hi` is
    /// normalized to the last node.
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self, String> {
        if step.is_nan() || step <= 0.0 || !step.is_finite() {
            return Err(format!("step must be positive and finite, got {step}"));
        }
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(format!("box is degenerate: [{lo}, {hi}]"));
        }
        let span = (hi - lo) / step;
        let n = span.round();
        if (span - n).abs() > 1e-9 * (1.0 + span.abs()) {
            return Err(format!(
                "(hi - lo) = {} is not an integer multiple of step = {step}",
                hi - lo
            ));
        }
        let count = n as usize + 1;
        if count < 2 {
            return Err("axis needs at least 2 nodes".to_string());
        }
        let hi = lo + (count - 1) as f64 * step;
        Ok(Axis {
            lo,
            hi,
            step,
            count,
        })
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.count);
        if i + 1 == self.count {
            self.hi
        } else {
            self.lo + i as f64 * self.step
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.node(i))
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// A function sampled on a uniform grid over a box, with `+∞` allowed.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    axes: Vec<Axis>,
    /// Row-major for dim 2: index = i0 * axes[1].count + i1.
    values: Vec<f64>,
}

impl SampledFunction {
    /// Samples a scalar function of one variable on `[lo, hi]` with spacing `step`.
    pub fn from_fn_1d(lo: f64, hi: f64, step: f64, f: impl Fn(f64) -> f64) -> Self {
        let axis = Axis::new(lo, hi, step).expect("invalid axis");
        let values = axis.nodes().map(f).collect();
        SampledFunction {
            axes: vec![axis],
            values,
        }
    }

    /// Wraps explicit node values for one dimension.
    pub fn from_values_1d(lo: f64, hi: f64, step: f64, values: Vec<f64>) -> Result<Self, String> {
        let axis = Axis::new(lo, hi, step)?;
        if values.len() != axis.count {
            return Err(format!(
                "expected {} values for the grid, got {}",
                axis.count,
                values.len()
            ));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err("values must be finite or +inf".to_string());
        }
        if values.iter().all(|v| !v.is_finite()) {
            return Err("at least one value must be finite".to_string());
        }
        Ok(SampledFunction {
            axes: vec![axis],
            values,
        })
    }

    /// Samples a scalar function of two variables on the product grid.
    pub fn from_fn_2d(
        box0: (f64, f64),
        box1: (f64, f64),
        step: f64,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let a0 = Axis::new(box0.0, box0.1, step).expect("invalid axis 0");
        let a1 = Axis::new(box1.0, box1.1, step).expect("invalid axis 1");
        let mut values = Vec::with_capacity(a0.count * a1.count);
        for i0 in 0..a0.count {
            for i1 in 0..a1.count {
                values.push(f(a0.node(i0), a1.node(i1)));
            }
        }
        SampledFunction {
            axes: vec![a0, a1],
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count_finite(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }

    /// Range (max - min) of the finite values; 0 if fewer than 2 finite.
    pub fn finite_range(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if hi > lo {
            hi - lo
        } else {
            0.0
        }
    }

    /// Finite sample points of dim-1 data as `(x, f(x))`, in grid order.
    pub fn finite_points_1d(&self) -> Vec<(f64, f64)> {
        assert_eq!(self.dim(), 1);
        let axis = &self.axes[0];
        (0..axis.count)
            .filter(|&i| self.values[i].is_finite())
            .map(|i| (axis.node(i), self.values[i]))
            .collect()
    }

    /// Finite sample points of dim-2 data as `([x0, x1], f)`.
    pub fn finite_points_2d(&self) -> Vec<([f64; 2], f64)> {
        assert_eq!(self.dim(), 2);
        let (a0, a1) = (&self.axes[0], &self.axes[1]);
        let mut out = Vec::new();
        for i0 in 0..a0.count {
            for i1 in 0..a1.count {
                let v = self.values[i0 * a1.count + i1];
                if v.is_finite() {
                    out.push(([a0.node(i0), a1.node(i1)], v));
                }
            }
        }
        out
    }

    pub fn require_finite(&self, min: usize) -> Result<(), ConvexError> {
        let found = self.count_finite();
        if found < min {
            Err(ConvexError::DegenerateInput { found })
        } else {
            Ok(())
        }
    }

    /// Evaluates by grid interpolation: linear (dim 1) or bilinear (dim 2).
    /// Returns +∞ outside the box or next to an infinite sample. Exact at
    /// grid nodes.
    pub fn interp(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim());
        match self.dim() {
            1 => self.interp_1d(x[0]),
            2 => self.interp_2d(x[0], x[1]),
            _ => unreachable!(),
        }
    }

    pub fn interp_1d(&self, x: f64) -> f64 {
        let axis = &self.axes[0];
        if !axis.contains(x) {
            return f64::INFINITY;
        }
        let t = (x - axis.lo) / axis.step;
        let i = (t.floor() as usize).min(axis.count - 2);
        let xi = axis.node(i);
        if x == xi {
            return self.values[i];
        }
        let xj = axis.node(i + 1);
        if x == xj {
            return self.values[i + 1];
        }
        let (ya, yb) = (self.values[i], self.values[i + 1]);
        if !ya.is_finite() || !yb.is_finite() {
            return f64::INFINITY;
        }
        ya + (x - xi) * (yb - ya) / (xj - xi)
    }

    fn interp_2d(&self, x0: f64, x1: f64) -> f64 {
        let (a0, a1) = (&self.axes[0], &self.axes[1]);
        if !a0.contains(x0) || !a1.contains(x1) {
            return f64::INFINITY;
        }
        let t0 = ((x0 - a0.lo) / a0.step).floor() as usize;
        let t1 = ((x1 - a1.lo) / a1.step).floor() as usize;
        let i0 = t0.min(a0.count - 2);
        let i1 = t1.min(a1.count - 2);
        let f00 = self.values[i0 * a1.count + i1];
        let f01 = self.values[i0 * a1.count + i1 + 1];
        let f10 = self.values[(i0 + 1) * a1.count + i1];
        let f11 = self.values[(i0 + 1) * a1.count + i1 + 1];
        if ![f00, f01, f10, f11].iter().all(|v| v.is_finite()) {
            return f64::INFINITY;
        }
        let u = (x0 - a0.node(i0)) / a0.step;
        let w = (x1 - a1.node(i1)) / a1.step;
        f00 * (1.0 - u) * (1.0 - w) + f01 * (1.0 - u) * w + f10 * u * (1.0 - w) + f11 * u * w
    }
}
