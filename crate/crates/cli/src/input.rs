//! Problem files. Every file is a JSON object with a `kind` field; vectors
//! are arrays of numbers and matrices are arrays of rows.

use conecert::Orientation;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Problem {
    Project(ProjectInput),
    Farkas(FarkasInput),
    Quadrature(QuadratureInput),
    Shape(ShapeInput),
    Membership(MembershipInput),
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Project(_) => "project",
            Problem::Farkas(_) => "farkas",
            Problem::Quadrature(_) => "quadrature",
            Problem::Shape(_) => "shape",
            Problem::Membership(_) => "membership",
        }
    }

    pub fn tol(&self) -> Option<f64> {
        match self {
            Problem::Project(p) => p.tol,
            Problem::Farkas(p) => p.tol,
            Problem::Quadrature(p) => p.tol,
            Problem::Shape(p) => p.tol,
            Problem::Membership(p) => p.tol,
        }
    }
}

fn dual_form() -> Orientation {
    Orientation::DualForm
}

/// Project `x` onto `{ y : <y, k_i> >= 0 }` (`dual_form`, the default) or
/// onto `cone(K)` (`generated`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectInput {
    pub generators: Vec<Vec<f64>>,
    pub x: Vec<f64>,
    #[serde(default = "dual_form")]
    pub orientation: Orientation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    pub s: Vec<f64>,
    pub p: f64,
}

/// Either the plain alternative for `(a, b)`, or the inequality form when
/// `pairs` and `r` are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarkasInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

fn unit_interval() -> [f64; 2] {
    [-1.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureInput {
    pub n: usize,
    #[serde(default = "unit_interval")]
    pub interval: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// `target` holds orthonormal Legendre coefficients; `target_monomial`
/// holds `c_0 + c_1 t + ...`. Exactly one must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeInput {
    pub n: usize,
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_monomial: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default)]
    pub grid_only: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// Cone membership by default; linear-span membership with `span: true`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembershipInput {
    pub generators: Vec<Vec<f64>>,
    pub x: Vec<f64>,
    #[serde(default)]
    pub span: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}
