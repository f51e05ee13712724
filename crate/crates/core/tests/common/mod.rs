//! Random instances and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use conecert::linalg::{pseudoinverse, Matrix, Vector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian_vec<R: Rng>(rng: &mut R, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_mat<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_gens<R: Rng>(rng: &mut R, d: usize, m: usize) -> Vec<Vector> {
    (0..m).map(|_| gaussian_vec(rng, d)).collect()
}

/// Least squares restricted to the columns in `subset`; `None` unless every
/// coefficient is nonnegative.
fn restricted_fit(gens: &[Vector], x: &Vector, subset: &[usize]) -> Option<Vector> {
    if subset.is_empty() {
        return Some(Vector::zeros(x.len()));
    }
    let cols: Vec<Vector> = subset.iter().map(|&i| gens[i].clone()).collect();
    let s = Matrix::from_columns(&cols);
    let c = pseudoinverse(&s) * x;
    if c.iter().any(|&v| v < -1e-12) {
        return None;
    }
    Some(&s * c)
}

/// `min_{rho >= 0} |S rho - x|` by trying every support; the minimizer is an
/// unconstrained least-squares fit on its own support.
pub fn oracle_cone_projection(gens: &[Vector], x: &Vector) -> Vector {
    let m = gens.len();
    let mut best = Vector::zeros(x.len());
    let mut best_obj = x.norm_squared();
    for mask in 1u32..(1 << m) {
        let subset: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        if let Some(p) = restricted_fit(gens, x, &subset) {
            let obj = (x - &p).norm_squared();
            if obj < best_obj {
                best_obj = obj;
                best = p;
            }
        }
    }
    best
}

/// Projection onto `{ y : <y, k_i> >= 0 }` by enumerating which constraints
/// hold with equality: project onto each face's linear span, keep the
/// nearest feasible candidate.
pub fn oracle_dual_projection(gens: &[Vector], x: &Vector) -> Vector {
    let m = gens.len();
    let scale = 1.0 + x.norm();
    let mut best: Option<(f64, Vector)> = None;
    for mask in 0u32..(1 << m) {
        let subset: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let y = if subset.is_empty() {
            x.clone()
        } else {
            let cols: Vec<Vector> = subset.iter().map(|&i| gens[i].clone()).collect();
            let s = Matrix::from_columns(&cols);
            x - &s * (pseudoinverse(&s) * x)
        };
        let feasible = gens
            .iter()
            .all(|k| y.dot(k) >= -1e-10 * scale * (1.0 + k.norm()));
        if feasible {
            let d = (x - &y).norm_squared();
            if best.as_ref().is_none_or(|b| d < b.0) {
                best = Some((d, y));
            }
        }
    }
    best.expect("zero is always feasible").1
}
