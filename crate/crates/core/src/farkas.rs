//! Theorems of the alternative with checkable certificates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cone::positive_relative_test;
use crate::error::{Error, Result};
use crate::linalg::{check_finite, nnls, Matrix, Vector};

/// NNLS residual norm (relative to `1 + |b|`) above which the second
/// system is declared.
pub const SYSTEM2_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alternative {
    /// `A^T y = b`, `y >= 0`
    System1,
    /// `A x <= 0`, `<b, x> > 0`
    System2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// `|A^T y - b| / (1 + |b|)`; zero for System 2.
    pub primal_residual: f64,
    /// System 1: `max(0, -min y)`. System 2: `max(0, max_i <a_i, x> / (|a_i| |x|))`.
    pub dual_violation: f64,
    /// System 2: `<b, x> / |x|`; zero for System 1.
    pub strict_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarkasOutcome {
    pub tag: Alternative,
    pub y: Option<Vector>,
    pub x: Option<Vector>,
    pub verification: Verification,
}

impl FarkasOutcome {
    pub fn system1(a: &Matrix, b: &Vector, y: Vector) -> Self {
        let primal = (a.tr_mul(&y) - b).norm() / (1.0 + b.norm());
        let neg = y.iter().fold(0.0f64, |acc, &v| acc.max(-v));
        FarkasOutcome {
            tag: Alternative::System1,
            y: Some(y),
            x: None,
            verification: Verification {
                primal_residual: primal,
                dual_violation: neg,
                strict_gap: 0.0,
            },
        }
    }

    pub fn system2(a: &Matrix, b: &Vector, x: Vector) -> Self {
        let xn = x.norm();
        let ax = a * &x;
        let mut viol = 0.0f64;
        for i in 0..a.nrows() {
            let an = a.row(i).norm();
            if an > 0.0 && xn > 0.0 {
                viol = viol.max(ax[i] / (an * xn));
            }
        }
        let gap = if xn > 0.0 { b.dot(&x) / xn } else { 0.0 };
        FarkasOutcome {
            tag: Alternative::System2,
            y: None,
            x: Some(x),
            verification: Verification {
                primal_residual: 0.0,
                dual_violation: viol,
                strict_gap: gap,
            },
        }
    }
}

fn check_shapes(a: &Matrix, b: &Vector) -> Result<()> {
    if a.ncols() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            found: b.len(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    check_finite(b, "right-hand side")
}

/// Decide which of `A^T y = b, y >= 0` and `A x <= 0, <b, x> > 0` holds.
///
/// `b` is projected onto the cone spanned by the rows of `A`. A residual
/// below [`SYSTEM2_THRESHOLD`] yields System 1 with the NNLS multipliers;
/// otherwise the residual itself is the System 2 witness.
pub fn farkas_alternative(a: &Matrix, b: &Vector, tol: f64) -> Result<FarkasOutcome> {
    check_shapes(a, b)?;
    let at = a.transpose();
    let sol = nnls(&at, b, tol)?;
    if sol.residual.norm() <= SYSTEM2_THRESHOLD * (1.0 + b.norm()) {
        Ok(FarkasOutcome::system1(a, b, sol.rho))
    } else {
        Ok(FarkasOutcome::system2(a, b, sol.residual))
    }
}

/// Recheck a certificate against `(A, b)` without trusting the solver.
///
/// System 1: `y >= 0` and `|A^T y - b| <= 1e-7 (1 + |b|)`.
/// System 2: `|x| > 1e-7 (1 + |b|)`, `(A x)_i <= tol (1 + |x|) |a_i|`,
/// `<b, x> >= |x|^2 / 2` and `<b, x> / |x| > 1e-7 (1 + |b|)`. The norm floor
/// keeps a rounding-level `x` from passing the dual test trivially.
pub fn verify_outcome(a: &Matrix, b: &Vector, outcome: &FarkasOutcome, tol: f64) -> bool {
    if check_shapes(a, b).is_err() {
        return false;
    }
    let bn = b.norm();
    match (outcome.tag, &outcome.y, &outcome.x) {
        (Alternative::System1, Some(y), None) => {
            y.len() == a.nrows()
                && y.iter().all(|&v| v >= 0.0 && v.is_finite())
                && (a.tr_mul(y) - b).norm() <= SYSTEM2_THRESHOLD * (1.0 + bn)
        }
        (Alternative::System2, None, Some(x)) => {
            if x.len() != a.ncols() || !x.iter().all(|v| v.is_finite()) {
                return false;
            }
            let xn = x.norm();
            if xn <= SYSTEM2_THRESHOLD * (1.0 + bn) {
                return false;
            }
            let ax = a * x;
            let dual_ok = (0..a.nrows()).all(|i| ax[i] <= tol * (1.0 + xn) * a.row(i).norm());
            let bx = b.dot(x);
            dual_ok && bx >= 0.5 * xn * xn && bx / xn > SYSTEM2_THRESHOLD * (1.0 + bn)
        }
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenFarkasReport {
    /// `(b, r) ∈ cone{(s_j, p_j)}`
    pub member_plain: bool,
    /// `(b, r) ∈ cone({(0, 1)} ∪ {(s_j, p_j)})`
    pub member_augmented: bool,
    /// Every sampled feasible `x` satisfied `<b, x> <= r + tol`.
    pub sampled_implication_holds: bool,
    /// A point with `<s_j, x> <= p_j` for all `j` was found.
    pub hypothesis_verified: bool,
    pub feasible_point: Option<Vec<f64>>,
    pub samples: usize,
}

const SAMPLE_TARGET: usize = 100;
const SAMPLE_ATTEMPTS: usize = 100_000;

/// Generalized Farkas check for the finite system `<s_j, x> <= p_j`.
///
/// Conic memberships are decided exactly (up to `tol`) in `R^{n+1}`. The
/// universally quantified implication "feasible `x` ⇒ `<b, x> <= r`" is
/// only spot-checked on rejection-sampled feasible points drawn from a
/// seeded generator.
pub fn generalized_farkas(
    pairs: &[(Vector, f64)],
    b: &Vector,
    r: f64,
    tol: f64,
    seed: u64,
) -> Result<GenFarkasReport> {
    let n = b.len();
    check_finite(b, "b")?;
    if !r.is_finite() {
        return Err(Error::NonFinite("r"));
    }
    for (s, p) in pairs {
        if s.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.len(),
            });
        }
        check_finite(s, "s_j")?;
        if !p.is_finite() {
            return Err(Error::NonFinite("p_j"));
        }
    }

    let lift = |s: &Vector, p: f64| {
        let mut v = Vector::zeros(n + 1);
        v.rows_mut(0, n).copy_from(s);
        v[n] = p;
        v
    };
    let mut gens: Vec<Vector> = pairs.iter().map(|(s, p)| lift(s, *p)).collect();
    let target = lift(b, r);
    let member_plain = positive_relative_test(&gens, &target, tol)?.positive;
    gens.push(lift(&Vector::zeros(n), 1.0));
    let member_augmented = positive_relative_test(&gens, &target, tol)?.positive;

    let feasible = find_feasible(pairs, n, tol);
    let is_feasible = |x: &Vector| {
        pairs
            .iter()
            .all(|(s, p)| s.dot(x) <= p + tol * (1.0 + p.abs()))
    };
    let implies = |x: &Vector| b.dot(x) <= r + tol * (1.0 + r.abs());

    let mut samples = 0;
    let mut holds = true;
    if let Some(x0) = &feasible {
        samples += 1;
        holds &= implies(x0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = 1.0 + x0.norm();
        let scales = [0.01, 0.1, 1.0, 10.0, 100.0];
        let mut attempts = 0;
        while samples < SAMPLE_TARGET && attempts < SAMPLE_ATTEMPTS {
            attempts += 1;
            let sigma = base * scales[attempts % scales.len()];
            let step = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = x0 + step * sigma;
            if is_feasible(&x) {
                samples += 1;
                holds &= implies(&x);
            }
        }
    }

    Ok(GenFarkasReport {
        member_plain,
        member_augmented,
        sampled_implication_holds: holds,
        hypothesis_verified: feasible.is_some(),
        feasible_point: feasible.map(|x| x.iter().copied().collect()),
        samples,
    })
}

/// Dykstra's alternating projections onto the halfspaces, started at the
/// origin. Returns a point violating no constraint by more than `tol`.
fn find_feasible(pairs: &[(Vector, f64)], n: usize, tol: f64) -> Option<Vector> {
    let violation = |x: &Vector| {
        pairs
            .iter()
            .map(|(s, p)| (s.dot(x) - p) / (1.0 + p.abs()))
            .fold(0.0f64, f64::max)
    };
    let mut x = Vector::zeros(n);
    if violation(&x) <= tol {
        return Some(x);
    }
    let mut increments = vec![Vector::zeros(n); pairs.len()];
    for _ in 0..20_000 {
        for (j, (s, p)) in pairs.iter().enumerate() {
            let ss = s.norm_squared();
            let y = &x + &increments[j];
            let excess = s.dot(&y) - p;
            let projected = if ss > 0.0 && excess > 0.0 {
                &y - s * (excess / ss)
            } else {
                y.clone()
            };
            increments[j] = y - &projected;
            x = projected;
        }
        if violation(&x) <= tol {
            return Some(x);
        }
    }
    None
}
