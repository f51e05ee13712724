//! Quadrature rules with positive weights on at most `n + 1` nodes that
//! integrate every polynomial of degree `<= n` exactly over `[a, b]`.
//!
//! Moments are taken against the orthonormal shifted Legendre basis
//! `phi_k(t) = sqrt(2 / (b - a)) p_k((2t - a - b) / (b - a))`, so the target
//! moment vector is `(sqrt(b - a), 0, ..., 0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legendre::{chebyshev_grid, legendre_basis};
use crate::linalg::{caratheodory_reduce, nnls, Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub interval: (f64, f64),
    pub degree: usize,
    pub moments: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
    pub interval: (f64, f64),
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(Error::BadInterval { a, b })
    }
}

/// `phi_0(t), ..., phi_n(t)` on `[a, b]`.
pub fn shifted_basis(n: usize, a: f64, b: f64, t: f64) -> Vec<f64> {
    let h = b - a;
    let s = (2.0 * t - a - b) / h;
    let c = (2.0 / h).sqrt();
    legendre_basis(n)
        .eval(s)
        .into_iter()
        .map(|p| c * p)
        .collect()
}

pub fn integral_moments(n: usize, a: f64, b: f64) -> Result<MomentSpec> {
    check_interval(a, b)?;
    let mut moments = vec![0.0; n + 1];
    moments[0] = (b - a).sqrt();
    Ok(MomentSpec {
        interval: (a, b),
        degree: n,
        moments,
    })
}

/// Positive rule matching `spec.moments`.
///
/// Weights on a Chebyshev–Lobatto candidate grid are fitted by NNLS, the
/// support is reduced to at most `n + 1` nodes with independent evaluation
/// vectors, and nodes closer than `1e-12 (b - a)` are merged.
pub fn positive_quadrature(spec: &MomentSpec, grid_size: usize) -> Result<QuadratureRule> {
    let (a, b) = spec.interval;
    check_interval(a, b)?;
    let n = spec.degree;
    if spec.moments.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: spec.moments.len(),
        });
    }
    if grid_size < 4 * (n + 1) {
        return Err(Error::InvalidInput(format!(
            "grid_size {grid_size} below 4 (n + 1) = {}",
            4 * (n + 1)
        )));
    }
    let mu = Vector::from_column_slice(&spec.moments);
    let scale = 1.0 + spec.moments[0].abs();

    let grid = chebyshev_grid(grid_size, a, b);
    let columns: Vec<Vector> = grid
        .iter()
        .map(|&t| Vector::from_vec(shifted_basis(n, a, b, t)))
        .collect();
    let e = Matrix::from_columns(&columns);
    let sol = nnls(&e, &mu, 1e-13)?;
    let fit_err = sol.residual.amax() / scale;
    if fit_err > 1e-8 {
        return Err(Error::MomentFitFailed { residual: fit_err });
    }

    let support: Vec<usize> = (0..grid.len()).filter(|&j| sol.rho[j] > 0.0).collect();
    let vecs: Vec<Vector> = support.iter().map(|&j| columns[j].clone()).collect();
    let ws: Vec<f64> = support.iter().map(|&j| sol.rho[j]).collect();
    let red = caratheodory_reduce(&vecs, &ws)?;

    let mut pairs: Vec<(f64, f64)> = red
        .indices
        .iter()
        .zip(&red.weights)
        .map(|(&k, &w)| (grid[support[k]], w))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    let merge_gap = 1e-12 * (b - a);
    let mut nodes: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
    for (t, w) in pairs {
        match nodes.last() {
            Some(&last) if t - last < merge_gap => *weights.last_mut().unwrap() += w,
            _ => {
                nodes.push(t);
                weights.push(w);
            }
        }
    }
    let keep: Vec<bool> = weights.iter().map(|&w| w > 1e-12).collect();
    let nodes: Vec<f64> = nodes
        .iter()
        .zip(&keep)
        .filter(|p| *p.1)
        .map(|p| *p.0)
        .collect();
    let weights: Vec<f64> = weights
        .iter()
        .zip(&keep)
        .filter(|p| *p.1)
        .map(|p| *p.0)
        .collect();

    let rule = QuadratureRule {
        nodes,
        weights,
        degree: n,
        interval: (a, b),
    };
    let miss = moment_error(&rule, spec);
    if miss > 1e-8 {
        return Err(Error::MomentFitFailed { residual: miss });
    }
    Ok(rule)
}

pub fn apply_rule<F: Fn(f64) -> f64>(rule: &QuadratureRule, f: F) -> f64 {
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| w * f(t))
        .sum()
}

fn moment_error(rule: &QuadratureRule, spec: &MomentSpec) -> f64 {
    let (a, b) = rule.interval;
    let n = spec.degree;
    let mut approx = vec![0.0; n + 1];
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        for (acc, phi) in approx.iter_mut().zip(shifted_basis(n, a, b, t)) {
            *acc += w * phi;
        }
    }
    let scale = 1.0 + spec.moments[0].abs();
    approx
        .iter()
        .zip(&spec.moments)
        .map(|(q, m)| (q - m).abs() / scale)
        .fold(0.0, f64::max)
}

/// `max_{k <= n} |Q(phi_k) - int phi_k| / (1 + |int phi_0|)` over the
/// rule's interval.
pub fn verify_exactness(rule: &QuadratureRule, n: usize) -> Result<f64> {
    let (a, b) = rule.interval;
    let spec = integral_moments(n, a, b)?;
    Ok(moment_error(rule, &spec))
}
