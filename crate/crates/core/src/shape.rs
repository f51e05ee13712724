//! Best `L2[-1, 1]` approximation from
//! `C_{n,r} = { p in P_n : p^{(r)}(t) >= 0 on [-1, 1] }`.
//!
//! Polynomials live in orthonormal Legendre coordinates, so the `L2` inner
//! product is the Euclidean one on coefficient vectors. The functional
//! `p ↦ p^{(r)}(alpha)` has representer `k_alpha = sum_i p_i^{(r)}(alpha) p_i`
//! and `C_{n,r} = { p : <p, k_alpha> >= 0 for all alpha }`. Discretizing
//! `alpha` over a grid turns the problem into a dual-form cone projection.
//!
//! [`project_shape`] solves on the grid and then refines the contact points
//! of the grid solution into exact zeros of `x0^{(r)}` (double zeros in the
//! interior) by Newton's method on the continuum optimality system. The
//! refined answer is accepted only if it re-certifies; otherwise the grid
//! answer is returned.

use serde::{Deserialize, Serialize};

use crate::cone::project_dual;
use crate::error::{Error, Result};
use crate::legendre::{chebyshev_grid, derivative_matrix, gauss_legendre, legendre_basis};
use crate::linalg::{numerical_rank, pseudoinverse, synthesis, Matrix, Vector};

/// Coordinates in the orthonormal Legendre basis `p_0..p_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendrePoly {
    pub coeffs: Vec<f64>,
}

impl LegendrePoly {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficients"));
        }
        Ok(LegendrePoly { coeffs })
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `L2[-1, 1]` norm (Parseval).
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Orthogonal projection of `f` onto `P_n`, by Gauss–Legendre
    /// quadrature. Exact when `f` is a polynomial of degree `<= n + 64`.
    pub fn from_fn<F: Fn(f64) -> f64>(n: usize, f: F) -> Self {
        let (t, w) = gauss_legendre(n + 33);
        let basis = legendre_basis(n);
        let mut coeffs = vec![0.0; n + 1];
        for (ti, wi) in t.iter().zip(&w) {
            let fv = f(*ti);
            for (c, p) in coeffs.iter_mut().zip(basis.eval(*ti)) {
                *c += wi * fv * p;
            }
        }
        LegendrePoly { coeffs }
    }

    fn as_vector(&self) -> Vector {
        Vector::from_column_slice(&self.coeffs)
    }
}

/// Value of `p^{(r)}(t)`; zero when `r` exceeds the degree bound.
pub fn eval_poly(p: &LegendrePoly, t: f64, r: usize) -> f64 {
    let n = p.degree_bound();
    if r > n {
        return 0.0;
    }
    let dc = derivative_matrix(n, r) * p.as_vector();
    legendre_basis(n)
        .eval(t)
        .iter()
        .zip(dc.iter())
        .map(|(b, c)| b * c)
        .sum()
}

/// `k_alpha = sum_i p_i^{(r)}(alpha) p_i`, so that `<k_alpha, p> = p^{(r)}(alpha)`.
pub fn representer(n: usize, r: usize, alpha: f64) -> LegendrePoly {
    LegendrePoly {
        coeffs: legendre_basis(n).eval_derivative(alpha, r),
    }
}

fn rep_vec(n: usize, r: usize, alpha: f64) -> Vector {
    Vector::from_vec(legendre_basis(n).eval_derivative(alpha, r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeProblem {
    pub n: usize,
    pub r: usize,
    pub grid: Vec<f64>,
    pub target: LegendrePoly,
}

impl ShapeProblem {
    pub fn new(n: usize, r: usize, grid: Vec<f64>, target: LegendrePoly) -> Result<Self> {
        if r >= n {
            return Err(Error::InvalidInput(format!(
                "need r < n, got r = {r}, n = {n}"
            )));
        }
        if target.degree_bound() != n {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: target.coeffs.len(),
            });
        }
        if grid.len() < n + 1 {
            return Err(Error::InvalidInput(format!(
                "grid has {} points, need at least {}",
                grid.len(),
                n + 1
            )));
        }
        if grid
            .iter()
            .any(|t| !t.is_finite() || !(-1.0..=1.0).contains(t))
        {
            return Err(Error::InvalidInput(
                "grid points must lie in [-1, 1]".into(),
            ));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "grid must be strictly increasing".into(),
            ));
        }
        Ok(ShapeProblem { n, r, grid, target })
    }

    /// `20 (n + 1)` Chebyshev–Lobatto points.
    pub fn with_default_grid(n: usize, r: usize, target: LegendrePoly) -> Result<Self> {
        Self::new(n, r, default_grid(n), target)
    }
}

pub fn default_grid(n: usize) -> Vec<f64> {
    chebyshev_grid(20 * (n + 1), -1.0, 1.0)
}

/// Each gap of `grid` (and the gaps to `±1`) split into ten equal parts.
pub fn check_grid(grid: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = Vec::with_capacity(grid.len() * 10 + 20);
    let mut knots: Vec<f64> = Vec::with_capacity(grid.len() + 2);
    if grid.first().is_none_or(|&g| g > -1.0) {
        knots.push(-1.0);
    }
    knots.extend_from_slice(grid);
    if grid.last().is_none_or(|&g| g < 1.0) {
        knots.push(1.0);
    }
    for w in knots.windows(2) {
        for j in 0..10 {
            pts.push(w[0] + (w[1] - w[0]) * j as f64 / 10.0);
        }
    }
    pts.push(*knots.last().unwrap());
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeResult {
    pub solution: LegendrePoly,
    /// Contact points, ascending.
    pub active_alphas: Vec<f64>,
    /// Multipliers on `k_alpha` for each contact point; all positive.
    pub rho: Vec<f64>,
    /// `min solution^{(r)}` over the check grid (refined at its local minima).
    pub min_derivative_on_checkgrid: f64,
    pub feasible_on_checkgrid: bool,
    /// `max |solution^{(r)}(alpha_i)|` over contact points.
    pub active_residual: f64,
    /// `solution^{(r)}` is not identically zero, so the contact bound applies.
    pub bound_applicable: bool,
    /// `m <= (n - r + 2) / 2`, or vacuous when not applicable.
    pub bound_ok: bool,
    /// Contacts were refined to exact zeros of `solution^{(r)}`.
    pub contacts_refined: bool,
    /// `|target - solution|` in `L2[-1, 1]`.
    pub distance: f64,
}

struct Certifier<'a> {
    problem: &'a ShapeProblem,
    checks: Vec<f64>,
    scale: f64,
    tol: f64,
}

impl<'a> Certifier<'a> {
    fn new(problem: &'a ShapeProblem, tol: f64) -> Self {
        Certifier {
            problem,
            checks: check_grid(&problem.grid),
            scale: 1.0 + problem.target.norm(),
            tol,
        }
    }

    fn bound(&self) -> f64 {
        self.tol * self.scale
    }

    fn deriv(&self, c: &Vector, t: f64, order: usize) -> f64 {
        rep_vec(self.problem.n, order, t).dot(c)
    }

    /// Local minima of `c^{(r)}` on the check grid, each refined by golden
    /// section over its bracketing cell. Returns `(t, value)` pairs.
    fn local_minima(&self, c: &Vector) -> Vec<(f64, f64)> {
        let r = self.problem.r;
        let ts = &self.checks;
        let vals: Vec<f64> = ts.iter().map(|&t| self.deriv(c, t, r)).collect();
        let mut out = Vec::new();
        for i in 0..ts.len() {
            let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
            let right = if i + 1 < ts.len() {
                vals[i + 1]
            } else {
                f64::INFINITY
            };
            if vals[i] <= left && vals[i] <= right {
                let lo = ts[i.saturating_sub(1)];
                let hi = ts[(i + 1).min(ts.len() - 1)];
                let (t, v) = golden_min(|t| self.deriv(c, t, r), lo, hi);
                if v < vals[i] {
                    out.push((t, v));
                } else {
                    out.push((ts[i], vals[i]));
                }
            }
        }
        out
    }

    fn finish(
        &self,
        c: Vector,
        mut contacts: Vec<(f64, f64)>,
        contacts_refined: bool,
    ) -> ShapeResult {
        let p = self.problem;
        contacts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let min_d = self
            .local_minima(&c)
            .iter()
            .map(|m| m.1)
            .fold(f64::INFINITY, f64::min);
        let active_residual = contacts
            .iter()
            .map(|(a, _)| self.deriv(&c, *a, p.r).abs())
            .fold(0.0, f64::max);
        let deriv_norm = (derivative_matrix(p.n, p.r) * &c).norm();
        let bound_applicable = deriv_norm > 1e-8;
        let m = contacts.len();
        let bound_ok = !bound_applicable || 2 * m <= p.n - p.r + 2;
        let distance = (&c - p.target.as_vector()).norm();
        ShapeResult {
            solution: LegendrePoly {
                coeffs: c.iter().copied().collect(),
            },
            active_alphas: contacts.iter().map(|x| x.0).collect(),
            rho: contacts.iter().map(|x| x.1).collect(),
            min_derivative_on_checkgrid: min_d,
            feasible_on_checkgrid: min_d >= -self.bound(),
            active_residual,
            bound_applicable,
            bound_ok,
            contacts_refined,
            distance,
        }
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..80 {
        if hi - lo <= 1e-15 {
            break;
        }
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    if fa < fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

struct GridSolve {
    coeffs: Vector,
    /// `(alpha, rho)` on an independent active set, ascending in alpha.
    contacts: Vec<(f64, f64)>,
    /// Indices into the working grid, aligned with `contacts`.
    indices: Vec<usize>,
}

fn solve_on(grid: &[f64], problem: &ShapeProblem, tol: f64) -> Result<GridSolve> {
    let gens: Vec<Vector> = grid
        .iter()
        .map(|&a| rep_vec(problem.n, problem.r, a))
        .collect();
    let x = problem.target.as_vector();
    let proj = project_dual(&gens, &x, tol)?;
    let mut pairs: Vec<(usize, f64)> = proj.active.iter().map(|&i| (i, proj.rho[i])).collect();
    pairs.sort_by_key(|p| p.0);
    Ok(GridSolve {
        coeffs: proj.point,
        contacts: pairs.iter().map(|&(i, w)| (grid[i], w)).collect(),
        indices: pairs.iter().map(|p| p.0).collect(),
    })
}

/// Projection onto the grid-discretized cone
/// `{ p : p^{(r)}(alpha_j) >= 0 for all grid alpha_j }`, with no contact
/// refinement.
pub fn project_shape_on_grid(problem: &ShapeProblem, tol: f64) -> Result<ShapeResult> {
    let cert = Certifier::new(problem, tol);
    let sol = solve_on(&problem.grid, problem, tol)?;
    Ok(cert.finish(sol.coeffs, sol.contacts, false))
}

const EXCHANGE_ROUNDS: usize = 8;

/// Best approximation from `C_{n,r}`: grid solve followed by contact
/// refinement; falls back to the grid answer when refinement does not
/// certify.
pub fn project_shape(problem: &ShapeProblem, tol: f64) -> Result<ShapeResult> {
    let cert = Certifier::new(problem, tol);
    let mut grid = problem.grid.clone();

    for _ in 0..EXCHANGE_ROUNDS {
        let sol = solve_on(&grid, problem, tol)?;
        let minima = cert.local_minima(&sol.coeffs);
        let worst = minima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);

        if sol.contacts.is_empty() && worst >= -cert.bound() {
            return Ok(cert.finish(sol.coeffs, Vec::new(), true));
        }
        if !sol.contacts.is_empty() {
            if let Some((c, contacts)) = polish(problem, &cert, cluster_contacts(&sol)) {
                return Ok(cert.finish(c, contacts, true));
            }
        }

        // add the negative dips of the grid solution and solve again
        let before = grid.len();
        for (t, v) in minima {
            if v < -cert.bound() && !grid.iter().any(|g| (g - t).abs() < 1e-12) {
                grid.push(t);
            }
        }
        if grid.len() == before {
            break;
        }
        grid.sort_by(|a, b| a.total_cmp(b));
    }

    let sol = solve_on(&problem.grid, problem, tol)?;
    Ok(cert.finish(sol.coeffs, sol.contacts, false))
}

#[derive(Debug, Clone, Copy)]
struct Contact {
    alpha: f64,
    rho: f64,
    interior: bool,
}

/// Group active grid points that sit within two grid steps of each other;
/// each group seeds one contact point.
fn cluster_contacts(sol: &GridSolve) -> Vec<Contact> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &idx) in sol.indices.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if idx - sol.indices[*g.last().unwrap()] <= 2 => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let total: f64 = g.iter().map(|&k| sol.contacts[k].1).sum();
            let endpoint = g
                .iter()
                .map(|&k| sol.contacts[k].0)
                .find(|&a| a == -1.0 || a == 1.0);
            match endpoint {
                Some(a) => Contact {
                    alpha: a,
                    rho: total,
                    interior: false,
                },
                None => {
                    let mean = g
                        .iter()
                        .map(|&k| sol.contacts[k].0 * sol.contacts[k].1)
                        .sum::<f64>()
                        / total;
                    Contact {
                        alpha: mean,
                        rho: total,
                        interior: true,
                    }
                }
            }
        })
        .collect()
}

/// Newton's method on the continuum optimality system: for every contact
/// `x0^{(r)}(alpha_i) = 0`, plus `x0^{(r+1)}(alpha_i) = 0` for interior
/// contacts, where `x0 = x + sum rho_i k_{alpha_i}`.
fn polish(
    problem: &ShapeProblem,
    cert: &Certifier<'_>,
    mut contacts: Vec<Contact>,
) -> Option<(Vector, Vec<(f64, f64)>)> {
    let n = problem.n;
    let r = problem.r;
    let x = problem.target.as_vector();
    let m = contacts.len();
    let interior: Vec<usize> = (0..m).filter(|&i| contacts[i].interior).collect();
    let unknowns = m + interior.len();

    let coeffs = |cs: &[Contact]| {
        cs.iter()
            .fold(x.clone(), |acc, c| acc + rep_vec(n, r, c.alpha) * c.rho)
    };
    let residual = |cs: &[Contact]| {
        let c = coeffs(cs);
        let mut f = Vector::zeros(unknowns);
        for (i, ct) in cs.iter().enumerate() {
            f[i] = rep_vec(n, r, ct.alpha).dot(&c);
        }
        for (j, &i) in interior.iter().enumerate() {
            f[m + j] = rep_vec(n, r + 1, cs[i].alpha).dot(&c);
        }
        f
    };

    let mut f = residual(&contacts);
    let target_norm = 1e-13 * cert.scale;
    for _ in 0..60 {
        if f.norm() <= target_norm {
            break;
        }
        let c = coeffs(&contacts);
        let k_r: Vec<Vector> = contacts.iter().map(|ct| rep_vec(n, r, ct.alpha)).collect();
        let k_r1: Vec<Vector> = contacts
            .iter()
            .map(|ct| rep_vec(n, r + 1, ct.alpha))
            .collect();
        let k_r2: Vec<Vector> = contacts
            .iter()
            .map(|ct| rep_vec(n, r + 2, ct.alpha))
            .collect();

        let mut jac = Matrix::zeros(unknowns, unknowns);
        // rows: g_i (i < m), h_j (m + j); cols: rho_i (i < m), alpha_j (m + j)
        for i in 0..m {
            for col in 0..m {
                jac[(i, col)] = k_r[i].dot(&k_r[col]);
            }
            for (jj, &j) in interior.iter().enumerate() {
                let mut v = contacts[j].rho * k_r[i].dot(&k_r1[j]);
                if i == j {
                    v += k_r1[i].dot(&c);
                }
                jac[(i, m + jj)] = v;
            }
        }
        for (ii, &i) in interior.iter().enumerate() {
            for col in 0..m {
                jac[(m + ii, col)] = k_r1[i].dot(&k_r[col]);
            }
            for (jj, &j) in interior.iter().enumerate() {
                let mut v = contacts[j].rho * k_r1[i].dot(&k_r1[j]);
                if i == j {
                    v += k_r2[i].dot(&c);
                }
                jac[(m + ii, m + jj)] = v;
            }
        }
        let step = -(pseudoinverse(&jac) * &f);

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = contacts.clone();
            for i in 0..m {
                trial[i].rho += lambda * step[i];
            }
            for (jj, &j) in interior.iter().enumerate() {
                trial[j].alpha += lambda * step[m + jj];
            }
            if trial
                .iter()
                .all(|ct| ct.alpha > -1.0 && ct.alpha < 1.0 || !ct.interior)
            {
                let ft = residual(&trial);
                if ft.norm() < f.norm() {
                    contacts = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    // certify the refined point
    let bound = cert.bound();
    if f.norm() > bound {
        return None;
    }
    if contacts.iter().any(|ct| ct.rho.is_nan() || ct.rho <= 0.0) {
        return None;
    }
    let mut alphas: Vec<f64> = contacts.iter().map(|ct| ct.alpha).collect();
    alphas.sort_by(|a, b| a.total_cmp(b));
    if alphas.windows(2).any(|w| w[1] - w[0] < 1e-8) {
        return None;
    }
    let reps: Vec<Vector> = alphas.iter().map(|&a| rep_vec(n, r, a)).collect();
    if numerical_rank(&synthesis(n + 1, &reps).ok()?) != m {
        return None;
    }
    let c = coeffs(&contacts);
    let worst = cert
        .local_minima(&c)
        .iter()
        .map(|v| v.1)
        .fold(f64::INFINITY, f64::min);
    if worst < -bound {
        return None;
    }
    Some((c, contacts.iter().map(|ct| (ct.alpha, ct.rho)).collect()))
}
