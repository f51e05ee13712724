//! Batch evaluation over independent problems.
//!
//! [`map`] fans out over rayon's pool when the `parallel` feature is on and
//! falls back to a plain iterator otherwise. [`map_sequential`] is always
//! available so both paths can be compared in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::cone::{self, MoreauSplit, ProjectionResult};
use crate::error::Result;
use crate::farkas::{self, FarkasOutcome};
use crate::linalg::{Matrix, Vector};

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Order-preserving map; results are identical to [`map_sequential`].
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

/// Generators plus a point to project.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeInstance {
    pub generators: Vec<Vector>,
    pub x: Vector,
}

pub fn project_dual_all(instances: &[ConeInstance], tol: f64) -> Vec<Result<ProjectionResult>> {
    map(instances, |p| cone::project_dual(&p.generators, &p.x, tol))
}

pub fn project_generated_all(
    instances: &[ConeInstance],
    tol: f64,
) -> Vec<Result<ProjectionResult>> {
    map(instances, |p| {
        cone::project_generated(&p.generators, &p.x, tol)
    })
}

pub fn moreau_all(instances: &[ConeInstance], tol: f64) -> Vec<Result<MoreauSplit>> {
    map(instances, |p| {
        cone::moreau_decompose(&p.generators, &p.x, tol)
    })
}

/// A Farkas system `A^T y = b, y >= 0` versus `A x <= 0, <b, x> > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasInstance {
    pub a: Matrix,
    pub b: Vector,
}

pub fn farkas_all(instances: &[FarkasInstance], tol: f64) -> Vec<Result<FarkasOutcome>> {
    map(instances, |p| farkas::farkas_alternative(&p.a, &p.b, tol))
}
