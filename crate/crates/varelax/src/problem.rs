//! Problem data: horizon, endpoints, the linear coefficient `a(t)` and the
//! integrand samples, plus the accumulated term
//! `B(s) = ∫ₛᵀ a(t) dt` that turns the linear part into `∫ B·u′` (up to the
//! constant `B(0)·u₀`, by integration by parts).

use crate::expr::Expr;
use crate::grid::SampledFunction;

/// The linear coefficient `t ↦ a(t) ∈ ℝᵐ`: uniform samples with
/// piecewise-linear interpolation, or a whitelisted closed form per component.
#[derive(Debug, Clone)]
pub enum LinearTerm {
    /// `values[i]` holds the m components at sample time `i`; times are
    /// uniform on `[0, T]`.
    Samples { values: Vec<Vec<f64>> },
    /// One expression in `t` per component.
    Exprs(Vec<Expr>),
}

impl LinearTerm {
    pub fn zero(dim: usize) -> Self {
        LinearTerm::Samples {
            values: vec![vec![0.0; dim], vec![0.0; dim]],
        }
    }

    pub fn constant(value: Vec<f64>) -> Self {
        LinearTerm::Samples {
            values: vec![value.clone(), value],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LinearTerm::Samples { values } => values.first().map_or(0, Vec::len),
            LinearTerm::Exprs(es) => es.len(),
        }
    }

    /// Evaluates component `k` at time `t ∈ [0, T]`.
    pub fn eval(&self, k: usize, t: f64, horizon: f64) -> f64 {
        match self {
            LinearTerm::Samples { values } => {
                let n = values.len();
                if n == 1 {
                    return values[0][k];
                }
                let pos = (t / horizon).clamp(0.0, 1.0) * (n - 1) as f64;
                let i = (pos.floor() as usize).min(n - 2);
                let frac = pos - i as f64;
                values[i][k] * (1.0 - frac) + values[i + 1][k] * frac
            }
            LinearTerm::Exprs(es) => es[k].eval(&[t]),
        }
    }
}

/// A full problem instance: minimize `∫₀ᵀ [a(t)·u + f(u′)] dt` with
/// `u(0) = u0`, `u(T) = u1`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub horizon: f64,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub linear: LinearTerm,
    pub f: SampledFunction,
}

impl ProblemSpec {
    pub fn new(
        horizon: f64,
        u0: Vec<f64>,
        u1: Vec<f64>,
        linear: LinearTerm,
        f: SampledFunction,
    ) -> Result<Self, String> {
        if horizon.is_nan() || horizon <= 0.0 || !horizon.is_finite() {
            return Err(format!("horizon must be positive, got {horizon}"));
        }
        let m = f.dim();
        if u0.len() != m || u1.len() != m {
            return Err(format!(
                "endpoint dimensions ({}, {}) must match the integrand dimension {m}",
                u0.len(),
                u1.len()
            ));
        }
        if linear.dim() != m {
            return Err(format!(
                "linear term dimension {} must match the integrand dimension {m}",
                linear.dim()
            ));
        }
        if let LinearTerm::Samples { values } = &linear {
            if values.len() < 2 {
                return Err("linear term needs at least 2 samples".to_string());
            }
        }
        Ok(ProblemSpec {
            horizon,
            u0,
            u1,
            linear,
            f,
        })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn delta_u(&self) -> Vec<f64> {
        self.u0.iter().zip(&self.u1).map(|(a, b)| b - a).collect()
    }
}

/// `B(s) = ∫ₛᵀ a(t) dt` tabulated on a uniform time grid, piecewise linear
/// between nodes. `B(T) = 0` exactly.
#[derive(Debug, Clone)]
pub struct AccumulatedTerm {
    pub times: Vec<f64>,
    /// Node-major storage: `b[i * dim + k]`.
    b: Vec<f64>,
    /// Prefix integrals `∫₀^{tᵢ} B_k ds`, node-major; B is linear between
    /// nodes, so segment integrals are exact quadratics.
    prefix: Vec<f64>,
    dim: usize,
}

/// Trapezoidal accumulation of `a` from `s` to `T` on `nodes` uniform nodes.
/// Exact for piecewise-linear `a` whose kinks align with the grid.
pub fn accumulate(spec: &ProblemSpec, nodes: usize) -> AccumulatedTerm {
    assert!(nodes >= 2, "need at least 2 quadrature nodes");
    let m = spec.dim();
    let t_end = spec.horizon;
    let times: Vec<f64> = (0..nodes)
        .map(|i| {
            if i + 1 == nodes {
                t_end
            } else {
                t_end * i as f64 / (nodes - 1) as f64
            }
        })
        .collect();
    let mut b = vec![0.0; nodes * m];
    for k in 0..m {
        let mut acc = 0.0;
        b[(nodes - 1) * m + k] = 0.0;
        for i in (0..nodes - 1).rev() {
            let dt = times[i + 1] - times[i];
            let a0 = spec.linear.eval(k, times[i], t_end);
            let a1 = spec.linear.eval(k, times[i + 1], t_end);
            acc += 0.5 * (a0 + a1) * dt;
            b[i * m + k] = acc;
        }
    }
    let mut prefix = vec![0.0; nodes * m];
    for k in 0..m {
        for i in 0..nodes - 1 {
            let dt = times[i + 1] - times[i];
            prefix[(i + 1) * m + k] =
                prefix[i * m + k] + 0.5 * (b[i * m + k] + b[(i + 1) * m + k]) * dt;
        }
    }
    AccumulatedTerm {
        times,
        b,
        prefix,
        dim: m,
    }
}

impl AccumulatedTerm {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    #[inline]
    pub fn node(&self, i: usize) -> &[f64] {
        &self.b[i * self.dim..(i + 1) * self.dim]
    }

    /// Scalar accessor for one-dimensional problems.
    #[inline]
    pub fn node1(&self, i: usize) -> f64 {
        debug_assert_eq!(self.dim, 1);
        self.b[i]
    }

    /// `B(0) = ∫₀ᵀ a`, the coefficient of the integration-by-parts constant.
    pub fn total(&self) -> &[f64] {
        self.node(0)
    }

    /// Piecewise-linear evaluation of component `k` at time `t`.
    pub fn eval(&self, k: usize, t: f64) -> f64 {
        let n = self.times.len();
        let t_end = *self.times.last().unwrap();
        let pos = (t / t_end).clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        self.b[i * self.dim + k] * (1.0 - frac) + self.b[(i + 1) * self.dim + k] * frac
    }

    /// `∫₀ᵗ B_k(s) ds` of the stored piecewise-linear table, exact.
    fn prefix_at(&self, k: usize, t: f64) -> f64 {
        let n = self.times.len();
        let t_end = self.times[n - 1];
        let t = t.clamp(self.times[0], t_end);
        let pos = (t / t_end).clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 2);
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let dt = t - ta;
        let bi = self.b[i * self.dim + k];
        let slope = (self.b[(i + 1) * self.dim + k] - bi) / (tb - ta);
        self.prefix[i * self.dim + k] + bi * dt + 0.5 * slope * dt * dt
    }

    /// Exact integral `∫ₚ𝑞 B_k(s) ds` of the stored piecewise-linear table.
    pub fn integrate(&self, k: usize, p: f64, q: f64) -> f64 {
        debug_assert!(p <= q);
        self.prefix_at(k, q) - self.prefix_at(k, p)
    }

    /// Min and max of component `k` over the nodes.
    pub fn range(&self, k: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.times.len() {
            let v = self.b[i * self.dim + k];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_spec(linear: LinearTerm) -> ProblemSpec {
        let f = SampledFunction::from_fn_1d(-2.0, 2.0, 0.5, |x| x * x);
        ProblemSpec::new(1.0, vec![0.0], vec![1.0], linear, f).unwrap()
    }

    #[test]
    fn zero_linear_term_gives_zero_b() {
        let spec = quad_spec(LinearTerm::zero(1));
        let b = accumulate(&spec, 11);
        assert!(b.b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_linear_term_is_exact_on_any_grid() {
        let alpha = 0.7;
        let spec = quad_spec(LinearTerm::constant(vec![alpha]));
        for nodes in [2, 5, 101] {
            let b = accumulate(&spec, nodes);
            for (i, &t) in b.times.iter().enumerate() {
                assert!(
                    (b.node1(i) - alpha * (1.0 - t)).abs() <= 1e-14,
                    "nodes {nodes} i {i}"
                );
            }
        }
    }

    #[test]
    fn linear_a_is_exact_for_trapezoid() {
        let a = Expr::parse("t", &["t"]).unwrap();
        let spec = quad_spec(LinearTerm::Exprs(vec![a]));
        let b = accumulate(&spec, 101);
        assert!((b.node1(0) - 0.5).abs() <= 1e-6);
        assert_eq!(b.node1(100), 0.0);
    }

    #[test]
    fn derivative_of_b_is_minus_a() {
        let a = Expr::parse("1 + 2*t", &["t"]).unwrap();
        let spec = quad_spec(LinearTerm::Exprs(vec![a.clone()]));
        let b = accumulate(&spec, 201);
        for i in 1..200 {
            let dt = b.times[i + 1] - b.times[i - 1];
            let db = (b.node1(i + 1) - b.node1(i - 1)) / dt;
            let at = a.eval(&[b.times[i]]);
            assert!((db + at).abs() <= 1e-6, "node {i}");
        }
    }

    #[test]
    fn integrate_matches_closed_form() {
        let spec = quad_spec(LinearTerm::constant(vec![1.0]));
        let b = accumulate(&spec, 101);
        // B(s) = 1 - s on [0,1]; ∫_p^q (1 - s) ds = (q - p) - (q² - p²)/2
        for (p, q) in [(0.0, 1.0), (0.2, 0.7), (0.13, 0.14)] {
            let exact = (q - p) - (q * q - p * p) / 2.0;
            assert!((b.integrate(0, p, q) - exact).abs() <= 1e-12, "({p}, {q})");
        }
    }

    #[test]
    fn spec_validation_catches_mismatches() {
        let f = SampledFunction::from_fn_1d(-1.0, 1.0, 0.5, |x| x * x);
        assert!(ProblemSpec::new(
            1.0,
            vec![0.0, 0.0],
            vec![0.0],
            LinearTerm::zero(1),
            f.clone()
        )
        .is_err());
        assert!(
            ProblemSpec::new(-1.0, vec![0.0], vec![0.0], LinearTerm::zero(1), f.clone()).is_err()
        );
        assert!(ProblemSpec::new(1.0, vec![0.0], vec![0.0], LinearTerm::zero(2), f).is_err());
    }
}
