//! Finitely generated cones and their dual-form partners.
//!
//! For a generator list `K = {k_1..k_m}` with synthesis operator `S`:
//! - the generated cone is `D = cone(K) = { S rho : rho >= 0 }`,
//! - its dual cone is `K⊖ = { y : <y, k_i> <= 0 for all i }`,
//! - the dual-form cone is `C = -K⊖ = { y : <y, k_i> >= 0 for all i }`.
//!
//! Projections onto `D` come from NNLS; projections onto `C` use
//! `P_C(x) = x + P_D(-x)`. Every projection carries residuals that certify
//! it independently of how it was computed.

use serde::{Deserialize, Serialize};

use crate::certificate::{all_pass, Check};
use crate::error::{Error, Result};
use crate::linalg::{
    caratheodory_reduce, check_finite, nnls, null_space_projector, numerical_rank, pseudoinverse,
    synthesis, Matrix, Vector,
};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `cone(K)`
    Generated,
    /// `-K⊖ = { y : <y, k> >= 0 for all k in K }`
    DualForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    dim: usize,
    generators: Vec<Vector>,
    orientation: Orientation,
    witness_e: Option<Vector>,
}

impl ConeSpec {
    pub fn new(dim: usize, generators: Vec<Vector>, orientation: Orientation) -> Result<Self> {
        for g in &generators {
            if g.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: g.len(),
                });
            }
            check_finite(g, "generator")?;
        }
        Ok(ConeSpec {
            dim,
            generators,
            orientation,
            witness_e: None,
        })
    }

    /// Attach a vector `e` with `<k, e> > 0` for every generator.
    pub fn with_witness(mut self, e: Vector) -> Result<Self> {
        if e.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: e.len(),
            });
        }
        check_finite(&e, "witness")?;
        if let Some(min) = witness_margin(&self.generators, &e) {
            if min <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "witness e has min <k, e> = {min:e}, must be positive"
                )));
            }
        }
        self.witness_e = Some(e);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn witness(&self) -> Option<&Vector> {
        self.witness_e.as_ref()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        contains(self, x, tol)
    }

    /// Project onto the cone this spec describes.
    pub fn project(&self, x: &Vector, tol: f64) -> Result<ProjectionResult> {
        match self.orientation {
            Orientation::Generated => project_generated(&self.generators, x, tol),
            Orientation::DualForm => project_dual(&self.generators, x, tol),
        }
    }

    /// Dual-form certificate, with the witness hypotheses checked when a
    /// witness is attached.
    pub fn certify(&self, x: &Vector, x0: &Vector, tol: f64) -> Result<CertificateReport> {
        let mut report = verify_characterization(&self.generators, x, x0, tol)?;
        if let Some(e) = &self.witness_e {
            let margin = witness_margin(&self.generators, e).unwrap_or(f64::INFINITY);
            report
                .checks
                .push(Check::flag("witness_positive", margin, margin > 0.0));
        }
        Ok(report)
    }
}

fn witness_margin(generators: &[Vector], e: &Vector) -> Option<f64> {
    generators
        .iter()
        .map(|k| k.dot(e))
        .min_by(|a, b| a.total_cmp(b))
}

/// Cone membership. `DualForm`: `min_i <x, k_i> >= -tol (1 + |x|)`.
/// `Generated`: NNLS residual at most `tol (1 + |x|)`.
pub fn contains(cone: &ConeSpec, x: &Vector, tol: f64) -> Result<bool> {
    if x.len() != cone.dim {
        return Err(Error::DimensionMismatch {
            expected: cone.dim,
            found: x.len(),
        });
    }
    let bound = tol * (1.0 + x.norm());
    match cone.orientation {
        Orientation::DualForm => Ok(min_inner(&cone.generators, x) >= -bound),
        Orientation::Generated => {
            let s = synthesis(cone.dim, &cone.generators)?;
            let sol = nnls(&s, x, tol)?;
            Ok(sol.residual.norm() <= bound)
        }
    }
}

fn min_inner(generators: &[Vector], x: &Vector) -> f64 {
    generators
        .iter()
        .map(|k| k.dot(x))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveRelative {
    pub positive: bool,
    pub rho: Option<Vector>,
    /// Separating vector `w`: `<gamma_i, w> <= 0` for all `i`, `<x, w> > 0`.
    pub witness: Option<Vector>,
}

/// Decide whether `x` is positive relative to `gamma`, i.e. lies in
/// `cone(gamma)`. On failure the NNLS residual is returned as the
/// separating witness.
pub fn positive_relative_test(gamma: &[Vector], x: &Vector, tol: f64) -> Result<PositiveRelative> {
    let s = synthesis(x.len(), gamma)?;
    let sol = nnls(&s, x, tol)?;
    let positive = sol.residual.norm() <= tol * (1.0 + x.norm());
    Ok(if positive {
        PositiveRelative {
            positive,
            rho: Some(sol.rho),
            witness: None,
        }
    } else {
        PositiveRelative {
            positive,
            rho: None,
            witness: Some(sol.residual),
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub point: Vector,
    /// Multipliers after reduction to an independent active set; zero off
    /// `active`.
    pub rho: Vector,
    pub active: Vec<usize>,
    pub kkt_residual: f64,
    /// `|<x - point, point>|`
    pub orthogonality_residual: f64,
}

/// Largest scaled violation of the NNLS optimality conditions for
/// `min |S rho - target|, rho >= 0`: sign of `rho`, dual feasibility
/// `<target - S rho, k_i> <= 0` and complementarity.
pub fn kkt_residual(generators: &[Vector], target: &Vector, rho: &Vector) -> f64 {
    let scale = 1.0 + target.norm();
    let fitted = generators
        .iter()
        .zip(rho.iter())
        .fold(Vector::zeros(target.len()), |acc, (k, r)| acc + k * *r);
    let residual = target - fitted;
    let mut worst = 0.0f64;
    for (k, &r) in generators.iter().zip(rho.iter()) {
        let g = residual.dot(k);
        let kn = k.norm();
        worst = worst.max(-r / scale);
        if kn > 0.0 {
            worst = worst.max(g / (scale * kn));
        }
        worst = worst.max((r * g).abs() / (scale * scale));
    }
    worst
}

/// Threshold separating active from inactive multipliers.
fn active_threshold(rho: &Vector) -> f64 {
    1e-10 * rho.amax().max(1.0)
}

struct ConeFit {
    fitted: Vector,
    reduced: Vector,
    active: Vec<usize>,
    raw: Vector,
}

/// Project `target` onto `cone(generators)` and reduce the multipliers to a
/// linearly independent active set.
fn fit_cone(generators: &[Vector], target: &Vector, tol: f64) -> Result<ConeFit> {
    let s = synthesis(target.len(), generators)?;
    let sol = nnls(&s, target, tol)?;
    let thresh = active_threshold(&sol.rho);
    let candidates: Vec<usize> = (0..sol.rho.len())
        .filter(|&i| sol.rho[i] > thresh)
        .collect();
    let vecs: Vec<Vector> = candidates.iter().map(|&i| generators[i].clone()).collect();
    let weights: Vec<f64> = candidates.iter().map(|&i| sol.rho[i]).collect();
    let red = caratheodory_reduce(&vecs, &weights)?;
    let mut reduced = Vector::zeros(generators.len());
    let active: Vec<usize> = red.indices.iter().map(|&j| candidates[j]).collect();
    for (&i, &w) in active.iter().zip(&red.weights) {
        reduced[i] = w;
    }
    Ok(ConeFit {
        fitted: &s * &sol.rho,
        reduced,
        active,
        raw: sol.rho,
    })
}

/// Projection onto `cone(K)`: `P(x) = S rho` with `rho` from NNLS.
pub fn project_generated(generators: &[Vector], x: &Vector, tol: f64) -> Result<ProjectionResult> {
    check_finite(x, "point")?;
    let fit = fit_cone(generators, x, tol)?;
    let point = fit.fitted;
    Ok(ProjectionResult {
        kkt_residual: kkt_residual(generators, x, &fit.raw),
        orthogonality_residual: (x - &point).dot(&point).abs(),
        point,
        rho: fit.reduced,
        active: fit.active,
    })
}

/// Projection onto `C = -K⊖`: `x0 = x + sum rho_i k_i` where `rho` solves
/// NNLS for the target `-x`.
pub fn project_dual(generators: &[Vector], x: &Vector, tol: f64) -> Result<ProjectionResult> {
    check_finite(x, "point")?;
    let neg = -x;
    let fit = fit_cone(generators, &neg, tol)?;
    let point = x + fit.fitted;
    Ok(ProjectionResult {
        kkt_residual: kkt_residual(generators, &neg, &fit.raw),
        orthogonality_residual: (x - &point).dot(&point).abs(),
        point,
        rho: fit.reduced,
        active: fit.active,
    })
}

/// Closed form for orthonormal `K`:
/// `P_C(x) = x + sum max(0, -<x, k_i>) k_i`.
pub fn project_orthonormal(generators: &[Vector], x: &Vector) -> Result<ProjectionResult> {
    check_finite(x, "point")?;
    let s = synthesis(x.len(), generators)?;
    let m = generators.len();
    let gram_dev = if m == 0 {
        0.0
    } else {
        (s.tr_mul(&s) - Matrix::identity(m, m)).amax()
    };
    if gram_dev > 1e-8 {
        return Err(Error::NotOrthonormal {
            deviation: gram_dev,
        });
    }
    let rho = Vector::from_iterator(m, generators.iter().map(|k| (-x.dot(k)).max(0.0)));
    let point = x + &s * &rho;
    let active = (0..m).filter(|&i| rho[i] > 0.0).collect();
    Ok(ProjectionResult {
        kkt_residual: kkt_residual(generators, &-x, &rho),
        orthogonality_residual: (x - &point).dot(&point).abs(),
        point,
        rho,
        active,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoreauSplit {
    /// `P_C(x)` for `C = cone(K)`
    pub pc: Vector,
    /// `P_{C⊖}(x)`
    pub pdual: Vector,
    pub identity_residual: f64,
    pub orthogonality_residual: f64,
}

pub fn moreau_decompose(generators: &[Vector], x: &Vector, tol: f64) -> Result<MoreauSplit> {
    let proj = project_generated(generators, x, tol)?;
    let pc = proj.point;
    let pdual = x - &pc;
    Ok(MoreauSplit {
        identity_residual: (&pc + &pdual - x).norm(),
        orthogonality_residual: pc.dot(&pdual).abs(),
        pc,
        pdual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `x` already lies in `C`; the only claim is `x0 = x`.
    pub trivial_feasible: bool,
    pub checks: Vec<Check>,
    /// Independent active generators carrying `x0 - x`.
    pub active: Vec<usize>,
    pub rho: Vec<f64>,
    pub m: usize,
}

impl CertificateReport {
    pub fn all_pass(&self) -> bool {
        all_pass(&self.checks)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Certify that `x0 = P_C(x)` for `C = -K⊖` through the characterization
/// `x0 = x + sum rho_i k_i` with `rho_i > 0` on independent `k_i` that are
/// all orthogonal to `x0`.
///
/// Checks, each recomputed from the inputs:
/// - `difference_in_cone`: `x0 - x` is a positive combination of an
///   independent subset of `K`
/// - `active_orthogonal`: `<k_i, x0> = 0` on that subset
/// - `x0_in_cone`: `<k_i, x0> >= 0` for all `i`
/// - `active_count`: `m <= d`, and `m <= d - 1` if `x0 != 0`
/// - `some_negative_inner`: `<x, k_i> < 0` for some `i`
pub fn verify_characterization(
    generators: &[Vector],
    x: &Vector,
    x0: &Vector,
    tol: f64,
) -> Result<CertificateReport> {
    let d = x.len();
    if x0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x0.len(),
        });
    }
    check_finite(x, "point")?;
    check_finite(x0, "candidate projection")?;
    let scale = 1.0 + x.norm();
    let bound = tol * scale;

    if min_inner(generators, x) >= -bound {
        let miss = (x0 - x).norm();
        return Ok(CertificateReport {
            trivial_feasible: true,
            checks: vec![Check::within("x0_equals_x", miss, bound)],
            active: Vec::new(),
            rho: Vec::new(),
            m: 0,
        });
    }

    let diff = x0 - x;
    let fit = fit_cone(generators, &diff, tol)?;
    let miss = (&fit.fitted - &diff).norm();
    let active = fit.active;
    let rho: Vec<f64> = active.iter().map(|&i| fit.reduced[i]).collect();
    let m = active.len();
    let independent = if m == 0 {
        true
    } else {
        let sub: Vec<Vector> = active.iter().map(|&i| generators[i].clone()).collect();
        numerical_rank(&synthesis(d, &sub)?) == m
    };
    let positive = rho.iter().all(|&r| r > 0.0);

    let mut checks = Vec::with_capacity(5);
    checks.push(Check::flag(
        "difference_in_cone",
        miss,
        miss <= bound && independent && positive && m >= 1,
    ));

    let orth = active
        .iter()
        .map(|&i| generators[i].dot(x0).abs() / generators[i].norm())
        .fold(0.0, f64::max);
    checks.push(Check::within("active_orthogonal", orth, bound));

    let feas = generators
        .iter()
        .filter(|k| k.norm() > 0.0)
        .map(|k| (-k.dot(x0) / k.norm()).max(0.0))
        .fold(0.0, f64::max);
    checks.push(Check::within("x0_in_cone", feas, bound));

    let limit = if x0.norm() > bound {
        d.saturating_sub(1)
    } else {
        d
    };
    checks.push(Check::flag(
        "active_count",
        m as f64 - limit as f64,
        m <= limit,
    ));

    let min_x = min_inner(generators, x);
    checks.push(Check::flag("some_negative_inner", min_x, min_x < 0.0));

    Ok(CertificateReport {
        trivial_feasible: false,
        checks,
        active,
        rho,
        m,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualDecomposition {
    /// Component in `N(S*)`.
    pub nu: Vector,
    /// `eta_j = -<y, k_j>`
    pub eta: Vector,
    /// `-(S*)^+ eta`, in `N(S*)^⊥`.
    pub z: Vector,
    /// `y - (S*)^+ S* y`; equals `nu`.
    pub x0: Vector,
}

/// Split `y ∈ K⊖` as `nu + z` with `nu ∈ N(S*)` and `z = -(S*)^+ eta`,
/// `eta >= 0`, `eta ∈ N(S)^⊥`.
pub fn dual_cone_decompose(
    generators: &[Vector],
    y: &Vector,
    tol: f64,
) -> Result<DualDecomposition> {
    check_finite(y, "point")?;
    let s = synthesis(y.len(), generators)?;
    let bound = tol * (1.0 + y.norm());
    let violation = generators
        .iter()
        .filter(|k| k.norm() > 0.0)
        .map(|k| k.dot(y) / k.norm())
        .fold(0.0, f64::max);
    if violation > bound {
        return Err(Error::NotInDualCone { violation });
    }
    let st_pinv = pseudoinverse(&s.transpose());
    let eta = -s.tr_mul(y);
    let z = -(&st_pinv * &eta);
    let nu = y - &z;
    let x0 = y - &st_pinv * s.tr_mul(y);
    Ok(DualDecomposition { nu, eta, z, x0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullRangeDecomposition {
    pub rho: Vector,
    /// `x - (S*)^+ S* x`, the component of `x` in `N(S*)`.
    pub x0: Vector,
    pub eta: Vector,
    pub pc: Vector,
    pub pdual: Vector,
    pub checks: Vec<Check>,
}

impl NullRangeDecomposition {
    pub fn all_pass(&self) -> bool {
        all_pass(&self.checks)
    }
}

/// `x = S rho + x0 - (S*)^+ eta` with `P_C(x) = S rho = (S*)^+ (S* x + eta)`
/// and `P_{C⊖}(x) = x0 - (S*)^+ eta`, for `C = cone(K)`.
pub fn null_range_decompose(
    generators: &[Vector],
    x: &Vector,
    tol: f64,
) -> Result<NullRangeDecomposition> {
    check_finite(x, "point")?;
    let s = synthesis(x.len(), generators)?;
    let sol = nnls(&s, x, tol)?;
    let rho = sol.rho;
    let pc = &s * &rho;
    let pdual = x - &pc;
    let st_pinv = pseudoinverse(&s.transpose());
    let stx = s.tr_mul(x);
    let x0 = x - &st_pinv * &stx;
    let eta = -s.tr_mul(&pdual);
    let z = &st_pinv * &eta;

    let xs = 1.0 + x.norm();
    let bound = tol * xs;
    let mut checks = Vec::with_capacity(8);

    let recomposed = &pc + &x0 - &z;
    checks.push(Check::within(
        "decomposition",
        (x - recomposed).norm(),
        bound,
    ));

    let rho_neg = rho.iter().fold(0.0f64, |a, &r| a.max(-r));
    checks.push(Check::within("rho_nonnegative", rho_neg, bound));
    let eta_neg = eta.iter().fold(0.0f64, |a, &e| a.max(-e));
    checks.push(Check::within("eta_nonnegative", eta_neg, bound * xs));
    let eta_null = (null_space_projector(&s) * &eta).norm();
    checks.push(Check::within("eta_in_null_perp", eta_null, bound * xs));
    let comp = rho.dot(&eta).abs();
    checks.push(Check::within("rho_eta_complementary", comp, bound * xs));

    let dual_miss = (&pdual - (&x0 - &z)).norm();
    checks.push(Check::within("dual_projection", dual_miss, bound));
    let x0_orth = x0.dot(&z).abs();
    checks.push(Check::within("x0_orthogonal", x0_orth, bound * xs));

    let alt_pc = &st_pinv * (&stx + &eta);
    checks.push(Check::within(
        "projection_formulas_agree",
        (&pc - alt_pc).norm(),
        bound,
    ));

    Ok(NullRangeDecomposition {
        rho,
        x0,
        eta,
        pc,
        pdual,
        checks,
    })
}
