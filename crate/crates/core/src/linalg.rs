//! Dense linear-algebra substrate.
//!
//! Pseudoinverse and null-space machinery backed by faer's SVD with a relative
//! rank cutoff, span membership with an orthogonal-residual witness, a
//! Lawson–Hanson NNLS solver and a constructive Carathéodory reduction.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Thin SVD truncated at the numerical rank.
///
/// Singular values are sorted in descending order. A value is kept iff
/// `sigma > max(rows, cols) * EPSILON * sigma_1`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `rows x rank`
    pub left: Matrix,
    pub singular_values: Vec<f64>,
    /// `cols x rank`
    pub right: Matrix,
    pub rank_tol: f64,
    rows: usize,
    cols: usize,
}

impl SvdFactors {
    pub fn new(m: &Matrix) -> Self {
        let (rows, cols) = m.shape();
        if rows == 0 || cols == 0 {
            return Self::empty(rows, cols);
        }
        let (u, sigma, v) = sorted_svd(m);
        let sigma_max = sigma.first().copied().unwrap_or(0.0);
        let rank_tol = rank_tolerance(rows, cols, sigma_max);
        let rank = sigma.iter().take_while(|&&s| s > rank_tol).count();
        SvdFactors {
            left: u.columns(0, rank).into_owned(),
            singular_values: sigma[..rank].to_vec(),
            right: v.columns(0, rank).into_owned(),
            rank_tol,
            rows,
            cols,
        }
    }

    fn empty(rows: usize, cols: usize) -> Self {
        SvdFactors {
            left: Matrix::zeros(rows, 0),
            singular_values: Vec::new(),
            right: Matrix::zeros(cols, 0),
            rank_tol: 0.0,
            rows,
            cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.left.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        &us * self.right.transpose()
    }

    pub fn pseudoinverse(&self) -> Matrix {
        let mut vs = self.right.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            vs.column_mut(j).scale_mut(1.0 / s);
        }
        &vs * self.left.transpose()
    }
}

fn rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Full SVD `m = U diag(sigma) V^T` with `V` square (`cols x cols`) and
/// singular values sorted descending, so that the trailing columns of `V`
/// span the null space.
fn sorted_svd(m: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (rows, cols) = m.shape();
    let fm = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = fm.svd().expect("SVD did not converge");
    let (u, v) = (svd.U(), svd.V());
    let diag = svd.S().column_vector();
    let k = rows.min(cols);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| diag[b].total_cmp(&diag[a]));

    let mut u_sorted = Matrix::zeros(rows, k);
    let mut v_sorted = Matrix::from_fn(cols, cols, |i, j| v[(i, j)]);
    let mut s_sorted = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..rows {
            u_sorted[(i, dst)] = u[(i, src)];
        }
        for i in 0..cols {
            v_sorted[(i, dst)] = v[(i, src)];
        }
        s_sorted.push(diag[src]);
    }
    (u_sorted, s_sorted, v_sorted)
}

/// Numerical rank under the relative cutoff used throughout the crate.
pub fn numerical_rank(m: &Matrix) -> usize {
    SvdFactors::new(m).rank()
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space_basis(m: &Matrix) -> Matrix {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Matrix::zeros(0, 0);
    }
    if rows == 0 {
        return Matrix::identity(cols, cols);
    }
    let (_, sigma, v) = sorted_svd(m);
    let tol = rank_tolerance(rows, cols, sigma[0]);
    let rank = sigma.iter().take_while(|&&s| s > tol).count();
    v.columns(rank, cols - rank).into_owned()
}

/// Moore–Penrose pseudoinverse. The zero matrix maps to the zero matrix of
/// transposed shape.
pub fn pseudoinverse(m: &Matrix) -> Matrix {
    SvdFactors::new(m).pseudoinverse()
}

/// Orthogonal projector `I - M^+ M` onto the null space of `m`.
pub fn null_space_projector(m: &Matrix) -> Matrix {
    let cols = m.ncols();
    let p = Matrix::identity(cols, cols) - pseudoinverse(m) * m;
    // symmetrize away rounding asymmetry
    (&p + p.transpose()) * 0.5
}

/// Synthesis operator `S`: the `dim x m` matrix whose columns are the
/// generators.
pub fn synthesis(dim: usize, generators: &[Vector]) -> Result<Matrix> {
    let mut s = Matrix::zeros(dim, generators.len());
    for (j, g) in generators.iter().enumerate() {
        if g.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: g.len(),
            });
        }
        s.set_column(j, g);
    }
    Ok(s)
}

pub(crate) fn check_finite(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanMembership {
    pub member: bool,
    /// Minimum-norm coefficients, present iff `member`.
    pub coefficients: Option<Vector>,
    /// `x - sum c_i gamma_i`; orthogonal to every `gamma_i`. When `x` is not
    /// in the span this is the witness `z` with `<gamma_i, z> = 0` and
    /// `<x, z> = |z|^2 > 0`.
    pub residual: Vector,
}

pub fn span_membership(x: &Vector, gamma: &[Vector], tol: f64) -> Result<SpanMembership> {
    let s = synthesis(x.len(), gamma)?;
    let c = pseudoinverse(&s) * x;
    let residual = x - &s * &c;
    let member = residual.norm() <= tol * (1.0 + x.norm());
    Ok(SpanMembership {
        member,
        coefficients: member.then_some(c),
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub rho: Vector,
    /// `x - S rho`
    pub residual: Vector,
    pub pivots: usize,
}

/// Nonnegative least squares `min |S rho - x|` over `rho >= 0`.
///
/// Lawson–Hanson active-set method. The entering variable is the one with
/// the largest gradient component `<x - S rho, k_j>`, lowest index on ties;
/// a variable enters only when that component exceeds
/// `tol * (1 + |x|) * |k_j|`. `S rho` is the projection of `x` onto the
/// cone generated by the columns of `S`.
pub fn nnls(s: &Matrix, x: &Vector, tol: f64) -> Result<NnlsSolution> {
    let (d, m) = s.shape();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "nnls tolerance must be positive, got {tol}"
        )));
    }
    check_finite(x, "nnls target")?;
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("nnls matrix"));
    }

    let mut rho = Vector::zeros(m);
    if m == 0 || d == 0 {
        return Ok(NnlsSolution {
            rho,
            residual: x.clone(),
            pivots: 0,
        });
    }

    let budget = 3 * m * d;
    let col_norms: Vec<f64> = (0..m).map(|j| s.column(j).norm()).collect();
    let scale = tol * (1.0 + x.norm());
    let mut passive = vec![false; m];
    let mut blocked = vec![false; m];
    let mut pivots = 0usize;

    loop {
        let residual = x - s * &rho;
        let w = s.tr_mul(&residual);

        let mut enter: Option<usize> = None;
        for j in 0..m {
            if passive[j] || blocked[j] || col_norms[j] == 0.0 {
                continue;
            }
            if w[j] > scale * col_norms[j] && enter.is_none_or(|e| w[j] > w[e]) {
                enter = Some(j);
            }
        }
        let Some(j) = enter else { break };

        pivots += 1;
        if pivots > budget {
            return Err(Error::IterationLimit { pivots });
        }
        passive[j] = true;

        let mut first_pass = true;
        loop {
            let z = solve_passive(s, x, &passive);
            if first_pass && z[j] <= 0.0 {
                // rounding made the entering column useless; skip it until
                // some other variable changes the iterate
                passive[j] = false;
                blocked[j] = true;
                break;
            }
            first_pass = false;

            let infeasible = (0..m).any(|i| passive[i] && z[i] <= 0.0);
            if !infeasible {
                for i in 0..m {
                    rho[i] = if passive[i] { z[i] } else { 0.0 };
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }

            let mut alpha = f64::INFINITY;
            for i in 0..m {
                if passive[i] && z[i] <= 0.0 {
                    let denom = rho[i] - z[i];
                    let a = if denom > 0.0 { rho[i] / denom } else { 0.0 };
                    alpha = alpha.min(a);
                }
            }
            for i in 0..m {
                if passive[i] {
                    rho[i] += alpha * (z[i] - rho[i]);
                    if rho[i] <= 0.0 || (z[i] <= 0.0 && rho[i] <= f64::EPSILON * z.amax()) {
                        rho[i] = 0.0;
                        passive[i] = false;
                    }
                }
            }
            pivots += 1;
            if pivots > budget {
                return Err(Error::IterationLimit { pivots });
            }
            if !passive.iter().any(|&p| p) {
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
        }
    }

    let residual = x - s * &rho;
    Ok(NnlsSolution {
        rho,
        residual,
        pivots,
    })
}

/// Least-squares solve restricted to the passive columns; inactive entries
/// of the returned vector are zero.
fn solve_passive(s: &Matrix, x: &Vector, passive: &[bool]) -> Vector {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let sub = s.select_columns(&idx);
    let coef = pseudoinverse(&sub) * x;
    let mut z = Vector::zeros(passive.len());
    for (k, &i) in idx.iter().enumerate() {
        z[i] = coef[k];
    }
    z
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// Strictly increasing indices into the input list.
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Rewrite `sum w_i v_i` as a strictly positive combination of a linearly
/// independent subset of the `v_i`.
///
/// While the support is dependent, a null-space direction `eta` of the
/// support columns is followed until the first weight hits zero. A zero
/// target yields an empty reduction.
pub fn caratheodory_reduce(vectors: &[Vector], weights: &[f64]) -> Result<Reduction> {
    if vectors.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: vectors.len(),
            found: weights.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidInput(
            "caratheodory_reduce needs nonnegative finite weights".into(),
        ));
    }
    if vectors.is_empty() {
        return Ok(Reduction {
            indices: Vec::new(),
            weights: Vec::new(),
        });
    }
    let dim = vectors[0].len();
    let s = synthesis(dim, vectors)?;
    let w0 = Vector::from_column_slice(weights);
    let target = &s * &w0;
    let mass: f64 = vectors.iter().zip(weights).map(|(v, w)| w * v.norm()).sum();
    let empty = Reduction {
        indices: Vec::new(),
        weights: Vec::new(),
    };
    if target.norm() <= 1e-14 * mass || mass == 0.0 {
        return Ok(empty);
    }

    let w_max = weights.iter().cloned().fold(0.0, f64::max);
    let drop_tol = 1e-15 * w_max;
    let mut w: Vec<f64> = weights.to_vec();
    let mut support: Vec<usize> = (0..w.len())
        .filter(|&i| w[i] > drop_tol && vectors[i].norm() > 0.0)
        .collect();

    loop {
        if support.is_empty() {
            return Ok(empty);
        }
        let sub = s.select_columns(&support);
        let null = null_space_basis(&sub);
        if null.ncols() == 0 {
            break;
        }
        let mut eta = null.column(null.ncols() - 1).into_owned();
        if !eta.iter().any(|&e| e > 0.0) {
            eta.neg_mut();
        }
        let mut step = f64::INFINITY;
        let mut hit = 0;
        for (k, &i) in support.iter().enumerate() {
            if eta[k] > 0.0 {
                let t = w[i] / eta[k];
                if t < step {
                    step = t;
                    hit = k;
                }
            }
        }
        for (k, &i) in support.iter().enumerate() {
            w[i] -= step * eta[k];
        }
        w[support[hit]] = 0.0;
        support.retain(|&i| w[i] > drop_tol);
    }

    // Re-solve on the independent support to wash out accumulated rounding.
    let sub = s.select_columns(&support);
    let refit = pseudoinverse(&sub) * &target;
    let current = Vector::from_iterator(support.len(), support.iter().map(|&i| w[i]));
    let err_refit = (&sub * &refit - &target).norm();
    let err_current = (&sub * &current - &target).norm();
    let weights = if refit.iter().all(|&c| c > 0.0) && err_refit <= err_current {
        refit
    } else {
        current
    };

    Ok(Reduction {
        indices: support,
        weights: weights.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_mat_close(a: &Matrix, b: &Matrix, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        let diff = (a - b).amax();
        assert!(diff <= tol, "matrices differ by {diff:e}\n{a}\n{b}");
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn pinv_identity_and_diagonal() {
        let i3 = Matrix::identity(3, 3);
        assert_mat_close(&pseudoinverse(&i3), &i3, 1e-15);
        let d = Matrix::from_diagonal(&v(&[2.0, 0.0]));
        assert_mat_close(
            &pseudoinverse(&d),
            &Matrix::from_diagonal(&v(&[0.5, 0.0])),
            1e-15,
        );
    }

    #[test]
    fn pinv_of_zero_and_empty() {
        let z = Matrix::zeros(2, 3);
        assert_eq!(pseudoinverse(&z), Matrix::zeros(3, 2));
        let e = Matrix::zeros(4, 0);
        assert_eq!(pseudoinverse(&e).shape(), (0, 4));
    }

    #[test]
    fn pinv_rectangular_identity() {
        let m = Matrix::from_row_slice(
            4,
            3,
            &[
                1.0, 2.0, 0.5, //
                -0.3, 1.1, 2.0, //
                0.7, -1.2, 0.4, //
                2.2, 0.1, -0.9,
            ],
        );
        let p = pseudoinverse(&m);
        let err = (&m * &p * &m - &m).norm();
        assert!(err <= 1e-12 * m.norm(), "{err:e}");
    }

    #[test]
    fn svd_factors_reconstruct() {
        let m = Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let f = SvdFactors::new(&m);
        assert_eq!(f.rank(), 2);
        assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let err = (f.reconstruct() - &m).amax();
        assert!(err <= 10.0 * f64::EPSILON * f.singular_values[0] * 3.0);
    }

    #[test]
    fn null_projector_examples() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert_mat_close(
            &null_space_projector(&m),
            &Matrix::from_diagonal(&v(&[0.0, 1.0])),
            1e-15,
        );
        let inv = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        assert_mat_close(&null_space_projector(&inv), &Matrix::zeros(2, 2), 1e-14);
        // null space spanned by (1,-1): v v^T / |v|^2
        let row = Matrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let expected = Matrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert_mat_close(&null_space_projector(&row), &expected, 1e-15);
    }

    #[test]
    fn span_membership_examples() {
        let gamma = vec![v(&[1.0, 1.0]), v(&[1.0, -1.0])];
        let r = span_membership(&v(&[3.0, 1.0]), &gamma, 1e-9).unwrap();
        assert!(r.member);
        let c = r.coefficients.unwrap();
        assert!((c[0] - 2.0).abs() < 1e-14 && (c[1] - 1.0).abs() < 1e-14);

        let r = span_membership(&gamma[0], &gamma, 1e-9).unwrap();
        let c = r.coefficients.unwrap();
        assert!((c[0] - 1.0).abs() < 1e-14 && c[1].abs() < 1e-14);

        let r = span_membership(&v(&[0.0, 1.0]), &[v(&[1.0, 0.0])], 1e-9).unwrap();
        assert!(!r.member);
        assert!(r.coefficients.is_none());
        assert_eq!(r.residual, v(&[0.0, 1.0]));
    }

    #[test]
    fn span_membership_empty_gamma() {
        let r = span_membership(&v(&[0.0, 0.0]), &[], 1e-9).unwrap();
        assert!(r.member);
        let r = span_membership(&v(&[1e-3, 0.0]), &[], 1e-9).unwrap();
        assert!(!r.member);
    }

    #[test]
    fn nnls_examples() {
        let s = Matrix::identity(2, 2);
        let sol = nnls(&s, &v(&[1.0, -1.0]), 1e-9).unwrap();
        assert_eq!(sol.rho, v(&[1.0, 0.0]));
        assert_eq!(sol.residual, v(&[0.0, -1.0]));

        let s = Matrix::from_columns(&[v(&[0.0, -1.0]), v(&[1.0, 1.0])]);
        let sol = nnls(&s, &v(&[-2.0, -1.0]), 1e-9).unwrap();
        assert!((sol.rho - v(&[1.0, 0.0])).amax() < 1e-14);

        let s = Matrix::from_columns(&[v(&[1.0, 1.0])]);
        let sol = nnls(&s, &v(&[1.0, 0.0]), 1e-9).unwrap();
        assert!((sol.rho[0] - 0.5).abs() < 1e-15);
        assert!(((&s * &sol.rho) - v(&[0.5, 0.5])).amax() < 1e-15);
    }

    #[test]
    fn nnls_empty_generators() {
        let s = Matrix::zeros(3, 0);
        let x = v(&[1.0, 2.0, 3.0]);
        let sol = nnls(&s, &x, 1e-9).unwrap();
        assert_eq!(sol.rho.len(), 0);
        assert_eq!(sol.residual, x);
    }

    #[test]
    fn nnls_rejects_bad_input() {
        let s = Matrix::identity(2, 2);
        assert!(matches!(
            nnls(&s, &v(&[1.0]), 1e-9),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(nnls(&s, &v(&[f64::NAN, 1.0]), 1e-9).is_err());
        assert!(nnls(&s, &v(&[1.0, 1.0]), 0.0).is_err());
    }

    #[test]
    fn caratheodory_examples() {
        let r = caratheodory_reduce(&[v(&[1.0, 0.0]), v(&[1.0, 0.0])], &[1.0, 1.0]).unwrap();
        assert_eq!(r.indices.len(), 1);
        assert!((r.weights[0] - 2.0).abs() < 1e-14);

        let r = caratheodory_reduce(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])], &[1.0, 2.0]).unwrap();
        assert_eq!(r.indices, vec![0, 1]);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn caratheodory_zero_target_is_empty() {
        let r = caratheodory_reduce(&[v(&[1.0, 0.0]), v(&[-1.0, 0.0])], &[1.0, 1.0]).unwrap();
        assert!(r.indices.is_empty());
        let r = caratheodory_reduce(&[], &[]).unwrap();
        assert!(r.indices.is_empty());
    }
}
