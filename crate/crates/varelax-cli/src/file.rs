//! Problem files: a TOML document with sections for the integrand, the
//! linear term, the horizon/endpoints, numerics and output paths. Unknown
//! keys are rejected; missing fields surface with their name.

use serde::Deserialize;
use varelax::expr::Expr;
use varelax::{LinearTerm, ProblemSpec, SampledFunction, SolveOptions};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub function: FunctionSection,
    #[serde(default)]
    pub linear_term: Option<LinearSection>,
    pub problem: ProblemSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub outputs: OutputsSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSection {
    /// Whitelisted closed form in `x` (dim 1) or `x1`, `x2` (dim 2).
    #[serde(default)]
    pub expr: Option<String>,
    /// Explicit grid values instead of an expression; row-major for dim 2.
    /// `inf` marks points outside the effective domain.
    #[serde(default)]
    pub values: Option<Values>,
    /// `box` is a keyword in Rust, hence the rename.
    #[serde(rename = "box")]
    pub box_: BoxSpec,
    pub step: f64,
}

impl FunctionSection {
    pub fn dim(&self) -> usize {
        match self.box_ {
            BoxSpec::One(_) => 1,
            BoxSpec::Two(_) => 2,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(Vec<f64>),
    Two(Vec<Vec<f64>>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum BoxSpec {
    One([f64; 2]),
    Two([[f64; 2]; 2]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSection {
    #[serde(default)]
    pub expr: Option<ExprSpec>,
    /// Uniform samples over `[0, T]`; one row per sample time for dim 2.
    #[serde(default)]
    pub samples: Option<Values>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ExprSpec {
    One(String),
    Two([String; 2]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub horizon: f64,
    pub u0: Endpoint,
    pub u1: Endpoint,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    One(f64),
    Two([f64; 2]),
}

impl Endpoint {
    fn to_vec(&self) -> Vec<f64> {
        match self {
            Endpoint::One(v) => vec![*v],
            Endpoint::Two(v) => v.to_vec(),
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub nodes: Option<usize>,
    pub n_chatter: Option<usize>,
    pub tol: Option<f64>,
    pub shells: Option<Vec<f64>>,
    pub threshold: Option<f64>,
    pub min_decrease_shells: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    pub dir: Option<String>,
}

/// Parses and validates a problem file into solver inputs.
pub fn load(text: &str) -> Result<(ProblemSpec, SolveOptions, OutputsSection), String> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| e.to_string())?;
    build(file)
}

pub fn build(file: ProblemFile) -> Result<(ProblemSpec, SolveOptions, OutputsSection), String> {
    let dim = file.function.dim();
    let f = build_function(&file.function, dim)?;
    let linear = match &file.linear_term {
        None => LinearTerm::zero(dim),
        Some(section) => build_linear(section, dim)?,
    };
    let spec = ProblemSpec::new(
        file.problem.horizon,
        file.problem.u0.to_vec(),
        file.problem.u1.to_vec(),
        linear,
        f,
    )?;
    let defaults = SolveOptions::default();
    let n = &file.numerics;
    if let Some(shells) = &n.shells {
        if shells.iter().any(|r| r.is_nan()) || shells.windows(2).any(|w| w[0] >= w[1]) {
            return Err("numerics.shells must be strictly increasing".into());
        }
    }
    let opts = SolveOptions {
        nodes: n.nodes.unwrap_or(defaults.nodes),
        n_chatter: n.n_chatter.unwrap_or(defaults.n_chatter),
        tol: n.tol.unwrap_or(defaults.tol),
        shells: n.shells.clone(),
        threshold: n.threshold,
        min_decrease_shells: n
            .min_decrease_shells
            .unwrap_or(defaults.min_decrease_shells),
        relaxed_only: false,
    };
    Ok((spec, opts, file.outputs))
}

fn build_function(section: &FunctionSection, dim: usize) -> Result<SampledFunction, String> {
    if section.step <= 0.0 {
        return Err("function.step must be positive".into());
    }
    let nodes_per_axis = |lo: f64, hi: f64| (hi - lo) / section.step;
    let total = match &section.box_ {
        BoxSpec::One([lo, hi]) => nodes_per_axis(*lo, *hi),
        BoxSpec::Two([b0, b1]) => nodes_per_axis(b0[0], b0[1]) * nodes_per_axis(b1[0], b1[1]),
    };
    if total.is_nan() || total > 4_000_000.0 {
        return Err("function: grid too large (over 4e6 nodes); coarsen `step`".into());
    }
    match (&section.expr, &section.values, &section.box_) {
        (Some(_), Some(_), _) => Err("function: give either `expr` or `values`, not both".into()),
        (None, None, _) => Err("function: missing `expr` or `values`".into()),
        (Some(src), None, BoxSpec::One([lo, hi])) => {
            let e = Expr::parse(src, &["x"]).map_err(|e| format!("function.expr: {e}"))?;
            let _ = dim;
            Ok(SampledFunction::from_fn_1d(*lo, *hi, section.step, |x| {
                e.eval(&[x])
            }))
        }
        (Some(src), None, BoxSpec::Two([b0, b1])) => {
            let e = Expr::parse(src, &["x1", "x2"]).map_err(|e| format!("function.expr: {e}"))?;
            Ok(SampledFunction::from_fn_2d(
                (b0[0], b0[1]),
                (b1[0], b1[1]),
                section.step,
                |x1, x2| e.eval(&[x1, x2]),
            ))
        }
        (None, Some(Values::One(vals)), BoxSpec::One([lo, hi])) => {
            SampledFunction::from_values_1d(*lo, *hi, section.step, vals.clone())
                .map_err(|e| format!("function.values: {e}"))
        }
        (None, Some(Values::Two(rows)), BoxSpec::Two([b0, b1])) => {
            let a0 = varelax::Axis::new(b0[0], b0[1], section.step)
                .map_err(|e| format!("function.box: {e}"))?;
            let a1 = varelax::Axis::new(b1[0], b1[1], section.step)
                .map_err(|e| format!("function.box: {e}"))?;
            if rows.len() != a0.count || rows.iter().any(|r| r.len() != a1.count) {
                return Err(format!(
                    "function.values: expected {} rows of {} values",
                    a0.count, a1.count
                ));
            }
            let rows = rows.clone();
            Ok(SampledFunction::from_fn_2d(
                (b0[0], b0[1]),
                (b1[0], b1[1]),
                section.step,
                |x1, x2| {
                    let i = ((x1 - b0[0]) / section.step).round() as usize;
                    let j = ((x2 - b1[0]) / section.step).round() as usize;
                    rows[i][j]
                },
            ))
        }
        _ => Err("function: `values`/`box` shapes disagree with the dimension".into()),
    }
}

fn build_linear(section: &LinearSection, dim: usize) -> Result<LinearTerm, String> {
    match (&section.expr, &section.samples) {
        (Some(_), Some(_)) => Err("linear_term: give either `expr` or `samples`, not both".into()),
        (None, None) => Ok(LinearTerm::zero(dim)),
        (Some(ExprSpec::One(src)), None) => {
            if dim != 1 {
                return Err("linear_term.expr: one expression for a dim-2 problem".into());
            }
            let e = Expr::parse(src, &["t"]).map_err(|e| format!("linear_term.expr: {e}"))?;
            Ok(LinearTerm::Exprs(vec![e]))
        }
        (Some(ExprSpec::Two(srcs)), None) => {
            if dim != 2 {
                return Err("linear_term.expr: two expressions for a dim-1 problem".into());
            }
            let mut es = Vec::with_capacity(2);
            for src in srcs {
                es.push(Expr::parse(src, &["t"]).map_err(|e| format!("linear_term.expr: {e}"))?);
            }
            Ok(LinearTerm::Exprs(es))
        }
        (None, Some(Values::One(vals))) => {
            if dim != 1 {
                return Err("linear_term.samples: scalar samples for a dim-2 problem".into());
            }
            if vals.len() < 2 {
                return Err("linear_term.samples: need at least 2 samples".into());
            }
            Ok(LinearTerm::Samples {
                values: vals.iter().map(|&v| vec![v]).collect(),
            })
        }
        (None, Some(Values::Two(rows))) => {
            if dim != 2 || rows.iter().any(|r| r.len() != 2) {
                return Err("linear_term.samples: expected rows of 2 components".into());
            }
            if rows.len() < 2 {
                return Err("linear_term.samples: need at least 2 samples".into());
            }
            Ok(LinearTerm::Samples {
                values: rows.clone(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOUBLE_WELL: &str = r#"
[function]
expr = "(x^2-1)^2"
box = [-2.0, 2.0]
step = 0.5

[problem]
horizon = 1.0
u0 = 0.0
u1 = 0.0
"#;

    #[test]
    fn parses_minimal_file() {
        let (spec, opts, _) = load(DOUBLE_WELL).unwrap();
        assert_eq!(spec.dim(), 1);
        assert_eq!(opts.nodes, 1001);
        assert_eq!(spec.f.interp_1d(0.0), 1.0);
    }

    #[test]
    fn missing_u1_names_the_field() {
        let text = DOUBLE_WELL.replace("u1 = 0.0\n", "");
        let err = load(&text).unwrap_err();
        assert!(err.contains("u1"), "error should name the field: {err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{DOUBLE_WELL}\n[numerics]\nnodse = 100\n");
        let err = load(&text).unwrap_err();
        assert!(err.contains("nodse"), "{err}");
    }

    #[test]
    fn grid_values_with_infinity() {
        let text = r#"
[function]
values = [0.0, inf, 0.0]
box = [-1.0, 1.0]
step = 1.0

[problem]
horizon = 1.0
u0 = 0.0
u1 = 0.5
"#;
        let (spec, _, _) = load(text).unwrap();
        assert_eq!(spec.f.interp_1d(0.0), f64::INFINITY);
    }

    #[test]
    fn rejects_expr_and_values_together() {
        let text = r#"
[function]
expr = "x^2"
values = [0.0, 1.0]
box = [-1.0, 1.0]
step = 2.0

[problem]
horizon = 1.0
u0 = 0.0
u1 = 0.0
"#;
        assert!(load(text).unwrap_err().contains("not both"));
    }

    #[test]
    fn two_dimensional_file() {
        let text = r#"
[function]
expr = "x1^2 + x2^2"
box = [[-1.0, 1.0], [-1.0, 1.0]]
step = 0.5

[linear_term]
expr = ["t", "0"]

[problem]
horizon = 1.0
u0 = [0.0, 0.0]
u1 = [0.5, 0.0]
"#;
        let (spec, _, _) = load(text).unwrap();
        assert_eq!(spec.dim(), 2);
    }
}
