//! Certified best approximation from finitely generated convex cones.
//!
//! The crate computes projections onto cones `cone(K)` and their dual-form
//! partners `{ y : <y, k> >= 0 }`, and attaches to every answer the
//! optimality residuals that prove it. The same separation machinery
//! drives:
//!
//! - [`farkas`]: the Farkas alternative with checkable certificates,
//! - [`quadrature`]: positive quadrature rules with at most `n + 1` nodes,
//! - [`shape`]: least-squares polynomial approximation under a sign
//!   constraint on the `r`-th derivative.
//!
//! [`batch`] runs many independent problems at once, data-parallel when the
//! `parallel` feature is enabled.

pub mod batch;
pub mod certificate;
pub mod cone;
pub mod error;
pub mod farkas;
pub mod legendre;
pub mod linalg;
pub mod quadrature;
pub mod shape;

pub use certificate::Check;
pub use cone::{ConeSpec, Orientation, ProjectionResult, DEFAULT_TOL};
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
