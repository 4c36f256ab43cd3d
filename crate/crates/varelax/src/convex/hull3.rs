//! Incremental convex hull of points in ℝ³.
//!
//! Used for the lower convex hull of lifted samples `(x₀, x₁, f(x))`. Points
//! are normalized to the unit box before the incremental pass so a single
//! absolute tolerance decides visibility; near-coplanar points are absorbed
//! into facets rather than becoming vertices.

use std::collections::HashMap;

const EPS_VISIBLE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Hull3 {
    /// Outward-oriented triangles, as indices into the input point list.
    pub facets: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HullError {
    /// All points lie on one plane (or worse). The caller decides how to
    /// triangulate the flat case.
    Degenerate,
    /// Fewer than four input points.
    TooFew,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Signed distance of `p` from the plane of facet `(a, b, c)`, positive on
/// the side the normal `cross(b-a, c-a)` points to.
fn signed_distance(a: [f64; 3], b: [f64; 3], c: [f64; 3], p: [f64; 3]) -> f64 {
    let n = cross(sub(b, a), sub(c, a));
    let len = norm(n);
    if len == 0.0 {
        return 0.0;
    }
    dot(n, sub(p, a)) / len
}

/// Per-axis normalization to the unit box; a zero-extent axis maps to 0.
fn normalize(points: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let range: Vec<f64> = (0..3).map(|k| (hi[k] - lo[k]).max(0.0)).collect();
    points
        .iter()
        .map(|p| {
            let mut q = [0.0; 3];
            for k in 0..3 {
                q[k] = if range[k] > 0.0 {
                    (p[k] - lo[k]) / range[k]
                } else {
                    0.0
                };
            }
            q
        })
        .collect()
}

impl Hull3 {
    /// Builds the full hull of `points`. Inputs may contain duplicates or
    /// interior points; they simply do not become vertices.
    pub fn build(points: &[[f64; 3]]) -> Result<Hull3, HullError> {
        if points.len() < 4 {
            return Err(HullError::TooFew);
        }
        let pts = normalize(points);
        let (t0, t1, t2, t3) = initial_tetrahedron(&pts)?;

        let mut facets: Vec<[usize; 3]> = Vec::new();
        // orient each face so the remaining tetra vertex is on the negative side
        for (tri, opp) in [
            ([t0, t1, t2], t3),
            ([t0, t1, t3], t2),
            ([t0, t2, t3], t1),
            ([t1, t2, t3], t0),
        ] {
            let d = signed_distance(pts[tri[0]], pts[tri[1]], pts[tri[2]], pts[opp]);
            if d > 0.0 {
                facets.push([tri[0], tri[2], tri[1]]);
            } else {
                facets.push(tri);
            }
        }

        for p in 0..pts.len() {
            if p == t0 || p == t1 || p == t2 || p == t3 {
                continue;
            }
            insert_point(&pts, &mut facets, p);
        }
        Ok(Hull3 { facets })
    }
}

fn initial_tetrahedron(pts: &[[f64; 3]]) -> Result<(usize, usize, usize, usize), HullError> {
    // extreme point, farthest from it, farthest from that line, farthest from
    // that plane
    let t0 = (0..pts.len())
        .min_by(|&a, &b| pts[a].partial_cmp(&pts[b]).unwrap())
        .unwrap();
    let t1 = (0..pts.len())
        .max_by(|&a, &b| {
            let da = norm(sub(pts[a], pts[t0]));
            let db = norm(sub(pts[b], pts[t0]));
            da.total_cmp(&db)
        })
        .unwrap();
    if norm(sub(pts[t1], pts[t0])) < EPS_VISIBLE {
        return Err(HullError::Degenerate);
    }
    let axis = sub(pts[t1], pts[t0]);
    let line_dist = |i: usize| norm(cross(axis, sub(pts[i], pts[t0]))) / norm(axis);
    let t2 = (0..pts.len())
        .max_by(|&a, &b| line_dist(a).total_cmp(&line_dist(b)))
        .unwrap();
    if line_dist(t2) < EPS_VISIBLE {
        return Err(HullError::Degenerate);
    }
    let plane_dist = |i: usize| signed_distance(pts[t0], pts[t1], pts[t2], pts[i]).abs();
    let t3 = (0..pts.len())
        .max_by(|&a, &b| plane_dist(a).total_cmp(&plane_dist(b)))
        .unwrap();
    if plane_dist(t3) < EPS_VISIBLE {
        return Err(HullError::Degenerate);
    }
    Ok((t0, t1, t2, t3))
}

fn insert_point(pts: &[[f64; 3]], facets: &mut Vec<[usize; 3]>, p: usize) {
    let visible: Vec<usize> = (0..facets.len())
        .filter(|&fi| {
            let [a, b, c] = facets[fi];
            signed_distance(pts[a], pts[b], pts[c], pts[p]) > EPS_VISIBLE
        })
        .collect();
    if visible.is_empty() {
        return; // inside or on the hull; absorbed
    }
    let visible_set: Vec<bool> = {
        let mut v = vec![false; facets.len()];
        for &fi in &visible {
            v[fi] = true;
        }
        v
    };
    // a directed edge of a visible facet is on the horizon iff its reverse
    // belongs to a facet that stays
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (fi, f) in facets.iter().enumerate() {
        for e in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            owner.insert(e, fi);
        }
    }
    let mut horizon: Vec<(usize, usize)> = Vec::new();
    for &fi in &visible {
        let f = facets[fi];
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            match owner.get(&(b, a)) {
                Some(&nb) if visible_set[nb] => {}
                _ => horizon.push((a, b)),
            }
        }
    }
    // drop visible facets, cone the horizon onto p keeping edge direction
    let mut keep: Vec<[usize; 3]> = facets
        .iter()
        .enumerate()
        .filter(|(fi, _)| !visible_set[*fi])
        .map(|(_, f)| *f)
        .collect();
    for (a, b) in horizon {
        keep.push([a, b, p]);
    }
    *facets = keep;
}
