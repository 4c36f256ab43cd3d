//! Piecewise-affine convex analysis in two dimensions.
//!
//! The lower convex hull of lifted samples `(x, f(x))` is stored as a
//! triangulated set of affine facets. Downstream only needs evaluation,
//! subdifferential queries, the conjugate and the decomposition of envelope
//! points into touching samples.

use crate::convex::hull3::{Hull3, HullError};
use crate::error::ConvexError;
use crate::grid::SampledFunction;

/// Affine facet `z = grad·x + offset` over the triangle `tri` (vertex indices).
#[derive(Debug, Clone)]
pub struct Facet2 {
    pub tri: [usize; 3],
    pub grad: [f64; 2],
    pub offset: f64,
}

/// Convex piecewise-affine function of two variables on a polygonal domain.
#[derive(Debug, Clone)]
pub struct Convex2 {
    verts: Vec<([f64; 2], f64)>,
    facets: Vec<Facet2>,
    /// Domain polygon: vertex indices in counter-clockwise order.
    domain: Vec<usize>,
    /// Vertex indices sorted by coordinates, for exact evaluation at vertices.
    by_coord: Vec<usize>,
}

/// Exposed face at a slope vector: the polytope of maximizers of `p·x - g(x)`,
/// given by its vertices.
#[derive(Debug, Clone)]
pub struct Face2 {
    pub vertices: Vec<[f64; 2]>,
    pub slope: [f64; 2],
}

/// Convex combination of touching sample points realizing an envelope value.
#[derive(Debug, Clone)]
pub struct Combo2 {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub represented: [f64; 2],
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull of 2-d points, returned as indices.
fn hull2d(pts: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a].partial_cmp(&pts[b]).unwrap());
    idx.dedup_by(|&mut a, &mut b| pts[a] == pts[b]);
    if idx.len() <= 2 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(idx.len() * 2);
    // lower then upper chain
    for pass in 0..2 {
        let start = hull.len();
        let it: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in it {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if cross2(pts[a], pts[b], pts[i]) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

impl Convex2 {
    /// Lower convex hull of lifted points, as a triangulated facet set.
    pub fn from_points(points: &[([f64; 2], f64)]) -> Result<Self, ConvexError> {
        if points.len() < 3 {
            return Err(ConvexError::DegenerateInput {
                found: points.len(),
            });
        }
        let lifted: Vec<[f64; 3]> = points.iter().map(|(x, z)| [x[0], x[1], *z]).collect();
        let lower: Vec<[usize; 3]> = match Hull3::build(&lifted) {
            Ok(hull) => hull
                .facets
                .into_iter()
                .filter(|f| {
                    let n = facet_normal(&lifted, *f);
                    n[2] < -1e-12 * norm3(n)
                })
                .collect(),
            Err(HullError::Degenerate) => {
                // all samples on one plane: triangulate the domain hull
                return Self::from_coplanar(points);
            }
            Err(HullError::TooFew) => {
                return Err(ConvexError::DegenerateInput {
                    found: points.len(),
                })
            }
        };
        if lower.is_empty() {
            return Err(ConvexError::DegenerateInput {
                found: points.len(),
            });
        }
        Self::assemble(points, &lower)
    }

    fn from_coplanar(points: &[([f64; 2], f64)]) -> Result<Self, ConvexError> {
        let xy: Vec<[f64; 2]> = points.iter().map(|(x, _)| *x).collect();
        let hull = hull2d(&xy);
        if hull.len() < 3 {
            return Err(ConvexError::DegenerateInput { found: hull.len() });
        }
        let tris: Vec<[usize; 3]> = (1..hull.len() - 1)
            .map(|i| [hull[0], hull[i], hull[i + 1]])
            .collect();
        Self::assemble(points, &tris)
    }

    fn assemble(points: &[([f64; 2], f64)], tris: &[[usize; 3]]) -> Result<Self, ConvexError> {
        // re-index to the vertices actually used
        let mut map: Vec<Option<usize>> = vec![None; points.len()];
        let mut verts: Vec<([f64; 2], f64)> = Vec::new();
        let mut facets: Vec<Facet2> = Vec::new();
        for t in tris {
            let mut tri = [0usize; 3];
            for (k, &old) in t.iter().enumerate() {
                tri[k] = *map[old].get_or_insert_with(|| {
                    verts.push(points[old]);
                    verts.len() - 1
                });
            }
            let (grad, offset) = plane_of(points[t[0]], points[t[1]], points[t[2]]).ok_or(
                ConvexError::DecompositionFailure {
                    point: vec![],
                    reason: "degenerate facet in lower hull".into(),
                },
            )?;
            facets.push(Facet2 { tri, grad, offset });
        }
        let xy: Vec<[f64; 2]> = verts.iter().map(|(x, _)| *x).collect();
        let domain = hull2d(&xy);
        let mut by_coord: Vec<usize> = (0..verts.len()).collect();
        by_coord.sort_by(|&a, &b| verts[a].0.partial_cmp(&verts[b].0).unwrap());
        Ok(Convex2 {
            verts,
            facets,
            domain,
            by_coord,
        })
    }

    /// Lower convex envelope of the finite samples of a 2-d grid function.
    pub fn envelope(f: &SampledFunction) -> Result<Self, ConvexError> {
        assert_eq!(f.dim(), 2);
        f.require_finite(3)?;
        Self::from_points(&f.finite_points_2d())
    }

    pub fn vertices(&self) -> &[([f64; 2], f64)] {
        &self.verts
    }

    pub fn facets(&self) -> &[Facet2] {
        &self.facets
    }

    /// Domain polygon in counter-clockwise order.
    pub fn domain_polygon(&self) -> Vec<[f64; 2]> {
        self.domain.iter().map(|&i| self.verts[i].0).collect()
    }

    fn scale(&self) -> f64 {
        self.verts
            .iter()
            .map(|(x, z)| x[0].abs().max(x[1].abs()).max(z.abs()))
            .fold(1.0, f64::max)
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        let tol = 1e-9 * self.scale();
        let n = self.domain.len();
        if n < 3 {
            return false;
        }
        (0..n).all(|i| {
            let a = self.verts[self.domain[i]].0;
            let b = self.verts[self.domain[(i + 1) % n]].0;
            cross2(a, b, x) >= -tol
        })
    }

    /// Evaluates the function: the stored value exactly at hull vertices, the
    /// max of the facet planes elsewhere inside the domain, +∞ outside.
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        if let Ok(i) = self
            .by_coord
            .binary_search_by(|&v| self.verts[v].0.partial_cmp(&x).unwrap())
        {
            return self.verts[self.by_coord[i]].1;
        }
        if !self.contains(x) {
            return f64::INFINITY;
        }
        self.facets
            .iter()
            .map(|f| f.grad[0] * x[0] + f.grad[1] * x[1] + f.offset)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Direct conjugate value `max_v (p·x_v - z_v)` over hull vertices.
    pub fn conjugate_value(&self, p: [f64; 2]) -> f64 {
        self.verts
            .iter()
            .map(|(x, z)| p[0] * x[0] + p[1] * x[1] - z)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bounding box of the facet gradients: the slope box of the conjugate.
    pub fn gradient_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for f in &self.facets {
            for k in 0..2 {
                lo[k] = lo[k].min(f.grad[k]);
                hi[k] = hi[k].max(f.grad[k]);
            }
        }
        for k in 0..2 {
            if hi[k] - lo[k] <= 0.0 || (hi[k] - lo[k]).is_nan() {
                let pad = 1.0 + lo[k].abs();
                lo[k] -= pad;
                hi[k] += pad;
            }
        }
        (lo, hi)
    }

    /// Exposed face at slope `p`: vertices attaining `max (p·x - g(x))`,
    /// in convex-position order when the face is two-dimensional.
    pub fn face(&self, p: [f64; 2]) -> Face2 {
        let scores: Vec<f64> = self
            .verts
            .iter()
            .map(|(x, z)| p[0] * x[0] + p[1] * x[1] - z)
            .collect();
        let best = scores.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let tol = 1e-9 * (1.0 + best.abs()) * (1.0 + self.scale());
        let attain: Vec<[f64; 2]> = self
            .verts
            .iter()
            .zip(&scores)
            .filter(|(_, &s)| best - s <= tol)
            .map(|((x, _), _)| *x)
            .collect();
        // reduce to convex position: the face is the hull of the attaining
        // vertices (collinear sets collapse to their extremes)
        let vertices = if attain.len() > 2 {
            hull2d(&attain).into_iter().map(|i| attain[i]).collect()
        } else {
            attain
        };
        Face2 { vertices, slope: p }
    }

    /// Fenchel conjugate as a `Convex2` on the gradient box. All interior
    /// kinks of the conjugate are facet gradients; boundary kinks along the
    /// box edges are recovered from 1-d upper envelopes, so the lower hull of
    /// the lifted candidates is the exact graph of the conjugate on the box.
    pub fn conjugate(&self) -> Result<Convex2, ConvexError> {
        let (lo, hi) = self.gradient_box();
        let mut cand: Vec<[f64; 2]> = vec![
            [lo[0], lo[1]],
            [lo[0], hi[1]],
            [hi[0], lo[1]],
            [hi[0], hi[1]],
        ];
        for f in &self.facets {
            let g = f.grad;
            if g[0] >= lo[0] && g[0] <= hi[0] && g[1] >= lo[1] && g[1] <= hi[1] {
                cand.push(g);
            }
        }
        let corners = [
            ([lo[0], lo[1]], [hi[0], lo[1]]),
            ([hi[0], lo[1]], [hi[0], hi[1]]),
            ([hi[0], hi[1]], [lo[0], hi[1]]),
            ([lo[0], hi[1]], [lo[0], lo[1]]),
        ];
        for (p0, p1) in corners {
            let dir = [p1[0] - p0[0], p1[1] - p0[1]];
            let len = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
            let dirn = [dir[0] / len, dir[1] / len];
            let lines: Vec<(f64, f64)> = self
                .verts
                .iter()
                .map(|(x, z)| {
                    (
                        dirn[0] * x[0] + dirn[1] * x[1],
                        p0[0] * x[0] + p0[1] * x[1] - z,
                    )
                })
                .collect();
            for t in upper_envelope_kinks(&lines) {
                if t > 1e-12 * len && t < len * (1.0 - 1e-12) {
                    cand.push([p0[0] + dirn[0] * t, p0[1] + dirn[1] * t]);
                }
            }
        }
        // dedup nearby candidates
        let tol = 1e-10 * (1.0 + hi[0].abs().max(hi[1].abs()));
        cand.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cand.dedup_by(|a, b| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol);
        let lifted: Vec<([f64; 2], f64)> = cand
            .into_iter()
            .map(|p| (p, self.conjugate_value(p)))
            .collect();
        Convex2::from_points(&lifted)
    }

    /// Decomposes an envelope point into touching samples with convex
    /// weights: the barycentric coordinates of `x̄` in a containing facet
    /// (minimal-diameter facet when several contain it), or the singleton
    /// when the envelope touches the sampled function at `x̄`.
    pub fn caratheodory(
        &self,
        f: &SampledFunction,
        x_bar: [f64; 2],
        tol_touch: f64,
    ) -> Result<Combo2, ConvexError> {
        if !self.contains(x_bar) {
            return Err(ConvexError::DecompositionFailure {
                point: x_bar.to_vec(),
                reason: "point outside envelope domain".into(),
            });
        }
        let env_val = self.eval(x_bar);
        let f_val = f.interp(&x_bar);
        if f_val.is_finite() && (f_val - env_val).abs() <= tol_touch {
            return Ok(Combo2 {
                points: vec![x_bar],
                weights: vec![1.0],
                represented: x_bar,
            });
        }
        let mut best: Option<(f64, [usize; 3], [f64; 3])> = None;
        for fc in &self.facets {
            if let Some(w) = self.barycentric(fc.tri, x_bar) {
                let d = self.diameter(fc.tri);
                if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
                    best = Some((d, fc.tri, w));
                }
            }
        }
        let (_, tri, w) = best.ok_or_else(|| ConvexError::DecompositionFailure {
            point: x_bar.to_vec(),
            reason: "no facet contains the point".into(),
        })?;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (k, &vi) in tri.iter().enumerate() {
            if w[k] > 1e-12 {
                let (x, z) = self.verts[vi];
                let fv = f.interp(&x);
                if !fv.is_finite() || (fv - z).abs() > tol_touch {
                    return Err(ConvexError::DecompositionFailure {
                        point: x_bar.to_vec(),
                        reason: format!("facet vertex {x:?} does not touch the samples"),
                    });
                }
                points.push(x);
                weights.push(w[k]);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(Combo2 {
            points,
            weights,
            represented: x_bar,
        })
    }

    fn barycentric(&self, tri: [usize; 3], x: [f64; 2]) -> Option<[f64; 3]> {
        let a = self.verts[tri[0]].0;
        let b = self.verts[tri[1]].0;
        let c = self.verts[tri[2]].0;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        if det.abs() < 1e-14 * self.scale() * self.scale() {
            return None;
        }
        let wb = ((x[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (x[1] - a[1])) / det;
        let wc = ((b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1])) / det;
        let wa = 1.0 - wb - wc;
        let tol = 1e-9;
        if wa >= -tol && wb >= -tol && wc >= -tol {
            Some([wa.max(0.0), wb.max(0.0), wc.max(0.0)])
        } else {
            None
        }
    }

    fn diameter(&self, tri: [usize; 3]) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                let (a, b) = (self.verts[tri[i]].0, self.verts[tri[j]].0);
                d = d.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        d
    }
}

fn facet_normal(pts: &[[f64; 3]], f: [usize; 3]) -> [f64; 3] {
    let (a, b, c) = (pts[f[0]], pts[f[1]], pts[f[2]]);
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Affine data of the plane through three lifted points, as `(grad, offset)`.
fn plane_of(a: ([f64; 2], f64), b: ([f64; 2], f64), c: ([f64; 2], f64)) -> Option<([f64; 2], f64)> {
    let det = (b.0[0] - a.0[0]) * (c.0[1] - a.0[1]) - (c.0[0] - a.0[0]) * (b.0[1] - a.0[1]);
    if det == 0.0 {
        return None;
    }
    let dzb = b.1 - a.1;
    let dzc = c.1 - a.1;
    let gx = (dzb * (c.0[1] - a.0[1]) - dzc * (b.0[1] - a.0[1])) / det;
    let gy = ((b.0[0] - a.0[0]) * dzc - (c.0[0] - a.0[0]) * dzb) / det;
    Some(([gx, gy], a.1 - gx * a.0[0] - gy * a.0[1]))
}

/// Kink positions of the upper envelope of lines `t ↦ slope·t + icept`.
fn upper_envelope_kinks(lines: &[(f64, f64)]) -> Vec<f64> {
    let mut ls: Vec<(f64, f64)> = lines.to_vec();
    ls.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // for equal slopes only the largest intercept can appear on the envelope
    ls.dedup_by(|next, prev| {
        if (next.0 - prev.0).abs() <= 1e-14 * (1.0 + prev.0.abs()) {
            prev.1 = prev.1.max(next.1);
            true
        } else {
            false
        }
    });
    // lines sorted by slope; a line leaves the envelope when the next one
    // overtakes the one below it no later than it did itself
    let mut stack: Vec<(f64, f64)> = Vec::new();
    let meet = |a: (f64, f64), b: (f64, f64)| (a.1 - b.1) / (b.0 - a.0);
    for l in ls {
        while stack.len() >= 2 {
            let top = stack[stack.len() - 1];
            let below = stack[stack.len() - 2];
            if meet(below, l) <= meet(below, top) {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(l);
    }
    stack.windows(2).map(|w| meet(w[0], w[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paraboloid() -> SampledFunction {
        SampledFunction::from_fn_2d((-2.0, 2.0), (-2.0, 2.0), 0.5, |x, y| x * x + y * y)
    }

    fn radial_double_well() -> SampledFunction {
        SampledFunction::from_fn_2d((-2.0, 2.0), (-2.0, 2.0), 0.5, |x, y| {
            let r2 = x * x + y * y;
            (r2 - 1.0) * (r2 - 1.0)
        })
    }

    #[test]
    fn envelope_dominates_and_touches_convex_input() {
        let f = paraboloid();
        let env = Convex2::envelope(&f).unwrap();
        for (x, z) in f.finite_points_2d() {
            let e = env.eval(x);
            assert!(e <= z + 1e-9, "domination at {x:?}: {e} vs {z}");
        }
        // strictly convex interior samples are hull vertices with exact values
        assert!((env.eval([0.0, 0.0]) - 0.0).abs() <= 1e-9);
        assert!((env.eval([0.5, -1.0]) - 1.25).abs() <= 1e-9);
    }

    #[test]
    fn envelope_fills_radial_well() {
        let f = radial_double_well();
        let env = Convex2::envelope(&f).unwrap();
        // the well bottom [|x| <= 1] is filled with 0
        assert!(env.eval([0.0, 0.0]).abs() <= 1e-9);
        assert!(f.interp(&[0.0, 0.0]) == 1.0);
        assert!(env.eval([0.5, 0.0]).abs() <= 1e-9);
    }

    #[test]
    fn affine_samples_collapse_to_single_plane() {
        let f = SampledFunction::from_fn_2d((-1.0, 1.0), (-1.0, 1.0), 0.5, |x, y| {
            1.0 + 2.0 * x - 3.0 * y
        });
        let env = Convex2::envelope(&f).unwrap();
        for fc in env.facets() {
            assert!((fc.grad[0] - 2.0).abs() <= 1e-9);
            assert!((fc.grad[1] + 3.0).abs() <= 1e-9);
            assert!((fc.offset - 1.0).abs() <= 1e-9);
        }
        assert!((env.eval([0.3, 0.3]) - (1.0 + 0.6 - 0.9)).abs() <= 1e-9);
    }

    #[test]
    fn conjugate_of_paraboloid_is_quarter_square() {
        let f = SampledFunction::from_fn_2d((-2.0, 2.0), (-2.0, 2.0), 0.25, |x, y| x * x + y * y);
        let env = Convex2::envelope(&f).unwrap();
        let conj = env.conjugate().unwrap();
        // f*(p) = |p|^2/4 for the true paraboloid; O(step) accuracy here
        for p in [[0.0, 0.0], [1.0, 0.5], [-2.0, 1.0], [3.0, -3.0]] {
            let expect = (p[0] * p[0] + p[1] * p[1]) / 4.0;
            let got = conj.eval(p);
            assert!(
                (got - expect).abs() <= 0.1,
                "conjugate at {p:?}: {got} vs {expect}"
            );
            // interior consistency with the direct vertex-max value
            assert!((got - env.conjugate_value(p)).abs() <= 1e-8);
        }
    }

    #[test]
    fn biconjugation_recovers_envelope_at_vertices() {
        let f = radial_double_well();
        let env = Convex2::envelope(&f).unwrap();
        let conj = env.conjugate().unwrap();
        let back = conj.conjugate().unwrap();
        for &(x, z) in env.vertices() {
            if back.contains(x) {
                assert!(
                    (back.eval(x) - z).abs() <= 1e-8,
                    "biconjugation at {x:?}: {} vs {z}",
                    back.eval(x)
                );
            }
        }
    }

    #[test]
    fn face_of_radial_well_at_zero_slope_spans_the_disk() {
        let f = radial_double_well();
        let env = Convex2::envelope(&f).unwrap();
        let face = env.face([0.0, 0.0]);
        // all face vertices realize f** = 0 at radius <= ~1
        assert!(face.vertices.len() >= 3);
        for v in &face.vertices {
            let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
            assert!(r <= 1.0 + 1e-9, "face vertex {v:?}");
            assert!(env.eval(*v).abs() <= 1e-9);
        }
    }

    #[test]
    fn fenchel_young_equality_on_faces() {
        let f = radial_double_well();
        let env = Convex2::envelope(&f).unwrap();
        for p in [[0.0, 0.0], [1.0, 1.0], [-2.0, 0.5], [4.0, -4.0]] {
            let fs = env.conjugate_value(p);
            let face = env.face(p);
            assert!(!face.vertices.is_empty());
            for v in &face.vertices {
                let lhs = env.eval(*v) + fs;
                let rhs = p[0] * v[0] + p[1] * v[1];
                assert!((lhs - rhs).abs() <= 1e-8, "FY at p={p:?} v={v:?}");
            }
        }
    }

    #[test]
    fn caratheodory_uses_at_most_four_touching_points() {
        let f = radial_double_well();
        let env = Convex2::envelope(&f).unwrap();
        for x in [[0.0, 0.0], [0.3, 0.2], [-0.5, 0.5], [1.5, 1.5]] {
            let combo = env.caratheodory(&f, x, 1e-8).unwrap();
            assert!(combo.points.len() <= 4);
            let wsum: f64 = combo.weights.iter().sum();
            assert!((wsum - 1.0).abs() <= 1e-9);
            let rx: f64 = combo
                .points
                .iter()
                .zip(&combo.weights)
                .map(|(p, w)| p[0] * w)
                .sum();
            let ry: f64 = combo
                .points
                .iter()
                .zip(&combo.weights)
                .map(|(p, w)| p[1] * w)
                .sum();
            assert!((rx - x[0]).abs() <= 1e-8 && (ry - x[1]).abs() <= 1e-8);
            let fval: f64 = combo
                .points
                .iter()
                .zip(&combo.weights)
                .map(|(p, w)| f.interp(p) * w)
                .sum();
            assert!((fval - env.eval(x)).abs() <= 1e-7, "value match at {x:?}");
        }
    }
}
