//! Convex-analysis primitives: convex envelope (biconjugate), Fenchel
//! conjugate, set-valued subdifferentials, and the decomposition of envelope
//! points into touching epigraph points.
//!
//! Dimension one is the fully exact path (all algebra on breakpoints);
//! dimension two stores the lower hull as triangulated affine facets.

mod hull3;
pub mod one;
pub mod two;

pub use one::{Combo1, Convex1, Face1};
pub use two::{Combo2, Convex2, Face2, Facet2};

use crate::error::ConvexError;
use crate::grid::SampledFunction;

/// Piecewise-affine convex representation of `f**` (and, by closure under
/// conjugation, of `f*`), for one or two variables.
#[derive(Debug, Clone)]
pub enum ConvexPiecewise {
    One(Convex1),
    Two(Convex2),
}

/// Exposed face of a convex function at a supporting slope.
#[derive(Debug, Clone)]
pub enum Face {
    One(Face1),
    Two(Face2),
}

/// Points of the sampled epigraph with convex weights expressing a point of
/// the envelope; at most m + 2 terms.
#[derive(Debug, Clone)]
pub struct CaratheodoryCombo {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub represented: Vec<f64>,
}

/// Lower convex envelope of the finite samples, restricted to the box.
pub fn convex_envelope(f: &SampledFunction) -> Result<ConvexPiecewise, ConvexError> {
    match f.dim() {
        1 => Ok(ConvexPiecewise::One(Convex1::envelope(f)?)),
        2 => Ok(ConvexPiecewise::Two(Convex2::envelope(f)?)),
        d => unreachable!("unsupported dimension {d}"),
    }
}

/// Fenchel conjugate on a slope box covering all chord slopes of `g`.
pub fn legendre_conjugate(g: &ConvexPiecewise) -> Result<ConvexPiecewise, ConvexError> {
    match g {
        ConvexPiecewise::One(c) => Ok(ConvexPiecewise::One(c.conjugate())),
        ConvexPiecewise::Two(c) => Ok(ConvexPiecewise::Two(c.conjugate()?)),
    }
}

/// Exposed face of `g` at slope `p`; equals `∂f*(p)` when `g = f**`.
pub fn subdifferential(g: &ConvexPiecewise, p: &[f64]) -> Face {
    match g {
        ConvexPiecewise::One(c) => Face::One(c.face(p[0])),
        ConvexPiecewise::Two(c) => Face::Two(c.face([p[0], p[1]])),
    }
}

/// Evaluates the piecewise representation; +∞ outside its effective domain.
pub fn eval(g: &ConvexPiecewise, x: &[f64]) -> f64 {
    match g {
        ConvexPiecewise::One(c) => c.eval(x[0]),
        ConvexPiecewise::Two(c) => c.eval([x[0], x[1]]),
    }
}

/// Decomposes an envelope point into touching epigraph points with convex
/// weights; at most m + 2 points, singleton when the envelope touches the
/// samples at the point itself.
pub fn caratheodory_decompose(
    f: &SampledFunction,
    env: &ConvexPiecewise,
    x_bar: &[f64],
    tol_touch: f64,
) -> Result<CaratheodoryCombo, ConvexError> {
    match env {
        ConvexPiecewise::One(c) => {
            let combo = c.caratheodory(f, x_bar[0], tol_touch)?;
            Ok(CaratheodoryCombo {
                points: combo.points.into_iter().map(|p| vec![p]).collect(),
                weights: combo.weights,
                represented: vec![combo.represented],
            })
        }
        ConvexPiecewise::Two(c) => {
            let combo = c.caratheodory(f, [x_bar[0], x_bar[1]], tol_touch)?;
            Ok(CaratheodoryCombo {
                points: combo.points.into_iter().map(|p| p.to_vec()).collect(),
                weights: combo.weights,
                represented: combo.represented.to_vec(),
            })
        }
    }
}

impl ConvexPiecewise {
    pub fn dim(&self) -> usize {
        match self {
            ConvexPiecewise::One(_) => 1,
            ConvexPiecewise::Two(_) => 2,
        }
    }

    pub fn as_one(&self) -> Option<&Convex1> {
        match self {
            ConvexPiecewise::One(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_two(&self) -> Option<&Convex2> {
        match self {
            ConvexPiecewise::Two(c) => Some(c),
            _ => None,
        }
    }
}
