//! TOML problem files.
//!
//! ```toml
//! dimension = 2
//!
//! [decision_set]
//! kind = "grid"                       # or "points" with `points = [[..], ..]`
//! values = [[0, 1, 2, 3], [0, 1, 2, 3]]
//!
//! [box]                               # optional, defaults to the tight box
//! lower = [0, 0]
//! upper = [3, 3]
//!
//! [[objective]]
//! kind = "linear"
//! slope = 1.5
//!
//! [[objective]]
//! kind = "quadratic"
//! curvature = 1.0
//! slope = 0.0                         # optional
//!
//! [[constraints]]
//! coeffs = [2, 1]
//! sense = ">="
//! rhs = 1.5                           # or `offset`, meaning coeffs·x + offset (sense) 0
//! ```
//!
//! Piecewise-linear pieces take `intercept` (optional), `breakpoints` and
//! `slopes`. Constraints are normalized to `aᵀx + b ≤ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{AffineConstraint, DecisionSet, ExtendedBox, Piece, ProblemSpec, SeparableConvexObjective};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dimension: usize,
    pub decision_set: DecisionSetConfig,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoxConfig>,
    pub objective: Vec<PieceConfig>,
    #[serde(default)]
    pub constraints: Vec<ConstraintConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecisionSetConfig {
    Grid { values: Vec<Vec<f64>> },
    Points { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PieceConfig {
    Linear {
        slope: f64,
    },
    Quadratic {
        curvature: f64,
        #[serde(default)]
        slope: f64,
    },
    PiecewiseLinear {
        #[serde(default)]
        intercept: f64,
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

fn config_err(field: impl std::fmt::Display, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {reason}"))
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Builds the problem in scalar type `S`.
    pub fn to_spec<S: Scalar>(&self) -> Result<ProblemSpec<S>> {
        let n = self.dimension;
        if n == 0 {
            return Err(config_err("dimension", "must be at least 1"));
        }
        let cast = |v: &[f64]| v.iter().copied().map(S::from_f64).collect::<Vec<S>>();
        let set = match &self.decision_set {
            DecisionSetConfig::Grid { values } => {
                if values.len() != n {
                    return Err(config_err("decision_set.values", format!("expected {n} coordinate lists")));
                }
                DecisionSet::grid(values.iter().map(|v| cast(v)).collect())
            }
            DecisionSetConfig::Points { points } => {
                if points.iter().any(|p| p.len() != n) {
                    return Err(config_err("decision_set.points", format!("every point needs {n} entries")));
                }
                DecisionSet::points(points.iter().map(|p| cast(p)).collect())
            }
        }
        .map_err(field_error)?;
        let bounds = match &self.bounds {
            Some(b) => {
                if b.lower.len() != n || b.upper.len() != n {
                    return Err(config_err("box", format!("lower and upper need {n} entries")));
                }
                Some(ExtendedBox::new(cast(&b.lower), cast(&b.upper)).map_err(field_error)?)
            }
            None => None,
        };
        if self.objective.len() != n {
            return Err(config_err("objective", format!("expected {n} pieces, found {}", self.objective.len())));
        }
        let pieces = self
            .objective
            .iter()
            .map(|p| match p {
                PieceConfig::Linear { slope } => Piece::Linear {
                    slope: S::from_f64(*slope),
                },
                PieceConfig::Quadratic { curvature, slope } => Piece::Quadratic {
                    curvature: S::from_f64(*curvature),
                    slope: S::from_f64(*slope),
                },
                PieceConfig::PiecewiseLinear {
                    intercept,
                    breakpoints,
                    slopes,
                } => Piece::PiecewiseLinear {
                    intercept: S::from_f64(*intercept),
                    breakpoints: cast(breakpoints),
                    slopes: cast(slopes),
                },
            })
            .collect();
        let objective = SeparableConvexObjective::new(pieces).map_err(field_error)?;
        let constraints = self
            .constraints
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let field = format!("constraints[{}]", j + 1);
                if c.coeffs.len() != n {
                    return Err(config_err(&field, format!("coeffs need {n} entries")));
                }
                // Move everything to the form coeffs·x + offset (sense) 0.
                let offset = match (c.rhs, c.offset) {
                    (Some(rhs), None) => -rhs,
                    (None, Some(offset)) => offset,
                    _ => return Err(config_err(&field, "give exactly one of `rhs` and `offset`")),
                };
                let (coeffs, offset) = match c.sense {
                    Sense::AtMost => (cast(&c.coeffs), S::from_f64(offset)),
                    Sense::AtLeast => (cast(&c.coeffs).into_iter().map(|a| -a).collect(), -S::from_f64(offset)),
                };
                AffineConstraint::new(coeffs, offset).map_err(|e| config_err(&field, e))
            })
            .collect::<Result<Vec<_>>>()?;
        ProblemSpec::new(set, bounds, objective, constraints).map_err(field_error)
    }

    /// Config describing `spec`, with every constraint written as
    /// `coeffs·x + offset <= 0`.
    pub fn from_spec<S: Scalar>(spec: &ProblemSpec<S>) -> Self {
        let f = |v: &[S]| v.iter().map(Scalar::to_f64).collect::<Vec<f64>>();
        let decision_set = match spec.decision_set() {
            DecisionSet::GridProduct(levels) => DecisionSetConfig::Grid {
                values: levels.iter().map(|l| f(l)).collect(),
            },
            DecisionSet::ExplicitPoints(points) => DecisionSetConfig::Points {
                points: points.iter().map(|p| f(p)).collect(),
            },
        };
        let bx = spec.extended_box();
        let objective = spec
            .objective()
            .pieces
            .iter()
            .map(|p| match p {
                Piece::Linear { slope } => PieceConfig::Linear { slope: slope.to_f64() },
                Piece::Quadratic { curvature, slope } => PieceConfig::Quadratic {
                    curvature: curvature.to_f64(),
                    slope: slope.to_f64(),
                },
                Piece::PiecewiseLinear {
                    intercept,
                    breakpoints,
                    slopes,
                } => PieceConfig::PiecewiseLinear {
                    intercept: intercept.to_f64(),
                    breakpoints: f(breakpoints),
                    slopes: f(slopes),
                },
            })
            .collect();
        let constraints = spec
            .constraints()
            .iter()
            .map(|c| ConstraintConfig {
                coeffs: f(&c.coeffs),
                sense: Sense::AtMost,
                rhs: None,
                offset: Some(c.offset.to_f64()),
            })
            .collect();
        ProblemConfig {
            dimension: spec.dimension(),
            decision_set,
            bounds: Some(BoxConfig {
                lower: f(&bx.lower),
                upper: f(&bx.upper),
            }),
            objective,
            constraints,
        }
    }
}

fn field_error(e: Error) -> Error {
    match e {
        Error::Invalid { field, reason } => config_err(field, reason),
        other => other,
    }
}

/// Parses a TOML problem file into an `f64` problem.
pub fn parse_problem_config(text: &str) -> Result<ProblemSpec<f64>> {
    ProblemConfig::parse(text)?.to_spec()
}
