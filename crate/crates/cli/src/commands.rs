//! Dispatch from a parsed problem to the library, with every reported claim
//! rechecked before it goes into the report.

use std::fmt::Write as _;

use conecert::cone::{kkt_residual, moreau_decompose, positive_relative_test, ConeSpec};
use conecert::farkas::{farkas_alternative, generalized_farkas, verify_outcome, Alternative};
use conecert::linalg::span_membership;
use conecert::quadrature::{apply_rule, integral_moments, positive_quadrature, verify_exactness};
use conecert::shape::{
    eval_poly, project_shape, project_shape_on_grid, LegendrePoly, ShapeProblem,
};
use conecert::{Check, Error, Matrix, Orientation, Result, Vector};
use serde_json::{json, Value};

use crate::input::{
    FarkasInput, MembershipInput, Problem, ProjectInput, QuadratureInput, ShapeInput,
};

pub struct Outcome {
    pub result: Value,
    pub certificates: Vec<Check>,
    pub csv: String,
}

pub fn execute(problem: &Problem, tol: f64, seed: u64) -> Result<Outcome> {
    match problem {
        Problem::Project(p) => project(p, tol),
        Problem::Farkas(p) => farkas(p, tol, seed),
        Problem::Quadrature(p) => quadrature(p),
        Problem::Shape(p) => shape(p, tol),
        Problem::Membership(p) => membership(p, tol),
    }
}

fn vector(v: &[f64]) -> Vector {
    Vector::from_column_slice(v)
}

fn vectors(rows: &[Vec<f64>], dim: usize, what: &str) -> Result<Vec<Vector>> {
    rows.iter()
        .map(|r| {
            if r.len() == dim {
                Ok(vector(r))
            } else {
                Err(Error::InvalidInput(format!(
                    "{what}: expected length {dim}, found {}",
                    r.len()
                )))
            }
        })
        .collect()
}

fn matrix(rows: &[Vec<f64>], cols: usize) -> Result<Matrix> {
    let rows = vectors(rows, cols, "matrix row")?;
    let mut m = Matrix::zeros(rows.len(), cols);
    for (i, r) in rows.iter().enumerate() {
        m.row_mut(i).copy_from(&r.transpose());
    }
    Ok(m)
}

fn list(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

fn csv_vectors(header: &str, columns: &[&[f64]]) -> String {
    let mut out = format!("{header}\n");
    let len = columns.iter().map(|c| c.len()).max().unwrap_or(0);
    for i in 0..len {
        let row: Vec<String> = columns
            .iter()
            .map(|c| c.get(i).map(|x| format!("{x:.16e}")).unwrap_or_default())
            .collect();
        let _ = writeln!(out, "{i},{}", row.join(","));
    }
    out
}

fn project(p: &ProjectInput, tol: f64) -> Result<Outcome> {
    let d = p.x.len();
    let x = vector(&p.x);
    let gens = vectors(&p.generators, d, "generator")?;
    let mut cone = ConeSpec::new(d, gens.clone(), p.orientation)?;
    if let Some(e) = &p.witness {
        cone = cone.with_witness(vectors(std::slice::from_ref(e), d, "witness")?.remove(0))?;
    }
    let proj = cone.project(&x, tol)?;
    let scale = 1.0 + x.norm();

    let mut certificates = Vec::new();
    let mut extra = json!({});
    match p.orientation {
        Orientation::DualForm => {
            let report = cone.certify(&x, &proj.point, tol)?;
            extra = json!({ "trivial_feasible": report.trivial_feasible, "m": report.m });
            certificates.extend(report.checks);
        }
        Orientation::Generated => {
            let split = moreau_decompose(&gens, &x, tol)?;
            certificates.push(Check::within(
                "kkt",
                kkt_residual(&gens, &x, &proj.rho),
                tol.max(1e-12) * 10.0,
            ));
            certificates.push(Check::within(
                "moreau_identity",
                (&split.pc + &split.pdual - &x).norm() / (scale * scale),
                tol,
            ));
            certificates.push(Check::within(
                "moreau_orthogonal",
                split.pc.dot(&split.pdual).abs() / (scale * scale),
                tol,
            ));
            certificates.push(Check::within(
                "matches_moreau",
                (&split.pc - &proj.point).norm() / scale,
                tol,
            ));
        }
    }
    let mut result = json!({
        "orientation": p.orientation,
        "point": list(&proj.point),
        "rho": list(&proj.rho),
        "active": proj.active,
        "kkt_residual": proj.kkt_residual,
        "orthogonality_residual": proj.orthogonality_residual,
    });
    if let (Value::Object(r), Value::Object(e)) = (&mut result, extra) {
        r.extend(e);
    }
    let csv = csv_vectors("i,x,point", &[&p.x, proj.point.as_slice()]);
    Ok(Outcome {
        result,
        certificates,
        csv,
    })
}

fn farkas(p: &FarkasInput, tol: f64, seed: u64) -> Result<Outcome> {
    let n = p.b.len();
    let b = vector(&p.b);
    if let Some(pairs) = &p.pairs {
        if p.a.is_some() {
            return Err(Error::InvalidInput(
                "give either `a` or `pairs`, not both".into(),
            ));
        }
        let r =
            p.r.ok_or_else(|| Error::InvalidInput("`pairs` needs the bound `r`".into()))?;
        let pairs: Vec<(Vector, f64)> = pairs
            .iter()
            .map(|q| {
                Ok((
                    vectors(std::slice::from_ref(&q.s), n, "pair vector")?.remove(0),
                    q.p,
                ))
            })
            .collect::<Result<_>>()?;
        let rep = generalized_farkas(&pairs, &b, r, tol, seed)?;
        let nested = !rep.member_plain || rep.member_augmented;
        // membership in the augmented cone forces the implication on every
        // feasible point, so a sampled counterexample would refute it
        let consistent =
            !rep.member_augmented || !rep.hypothesis_verified || rep.sampled_implication_holds;
        let certificates = vec![
            Check::flag("memberships_nested", 0.0, nested),
            Check::flag("sampled_implication_consistent", 0.0, consistent),
        ];
        let csv = csv_vectors(
            "i,feasible_point",
            &[rep.feasible_point.as_deref().unwrap_or(&[])],
        );
        let result = serde_json::to_value(&rep).expect("plain data");
        return Ok(Outcome {
            result,
            certificates,
            csv,
        });
    }

    let rows =
        p.a.as_ref()
            .ok_or_else(|| Error::InvalidInput("farkas needs `a` or `pairs`".into()))?;
    let a = matrix(rows, n)?;
    let out = farkas_alternative(&a, &b, tol)?;
    let verified = verify_outcome(&a, &b, &out, tol);
    let v = out.verification;
    let residual = match out.tag {
        Alternative::System1 => v.primal_residual,
        Alternative::System2 => v.dual_violation,
    };
    let certificates = vec![Check::flag("certificate_verifies", residual, verified)];
    let (name, cert) = match (&out.y, &out.x) {
        (Some(y), _) => ("y", list(y)),
        (_, Some(x)) => ("x", list(x)),
        _ => ("x", Vec::new()),
    };
    let result = json!({
        "alternative": out.tag,
        name: cert,
        "verification": v,
    });
    let csv = csv_vectors(&format!("i,{name}"), &[&cert]);
    Ok(Outcome {
        result,
        certificates,
        csv,
    })
}

fn quadrature(p: &QuadratureInput) -> Result<Outcome> {
    let n = p.n;
    let [a, b] = p.interval;
    let spec = integral_moments(n, a, b)?;
    let rule = positive_quadrature(&spec, p.grid_size.unwrap_or(16 * (n + 1)))?;
    let exactness = verify_exactness(&rule, n)?;

    let table: Vec<Value> = (0..=n)
        .map(|k| {
            let q = apply_rule(&rule, |t| t.powi(k as i32));
            let kk = (k + 1) as i32;
            let exact = (b.powi(kk) - a.powi(kk)) / kk as f64;
            json!({ "k": k, "quadrature": q, "exact": exact, "error": (q - exact).abs() })
        })
        .collect();
    let min_w = rule.weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let in_interval =
        rule.nodes.iter().all(|&t| t >= a && t <= b) && rule.nodes.windows(2).all(|w| w[0] < w[1]);
    let certificates = vec![
        Check::within("basis_exactness", exactness, 1e-8),
        Check::flag("weights_positive", min_w, min_w > 0.0),
        Check::flag(
            "node_count",
            rule.nodes.len() as f64,
            rule.nodes.len() <= n + 1,
        ),
        Check::flag("nodes_in_interval", 0.0, in_interval),
    ];
    let csv = csv_vectors("i,node,weight", &[&rule.nodes, &rule.weights]);
    let result = json!({
        "nodes": rule.nodes,
        "weights": rule.weights,
        "degree": n,
        "interval": [a, b],
        "monomial_exactness": table,
    });
    Ok(Outcome {
        result,
        certificates,
        csv,
    })
}

fn shape(p: &ShapeInput, tol: f64) -> Result<Outcome> {
    let n = p.n;
    let target = match (&p.target, &p.target_monomial) {
        (Some(c), None) => LegendrePoly::new(c.clone())?,
        (None, Some(c)) => {
            if c.len() > n + 1 {
                return Err(Error::InvalidInput(format!(
                    "target_monomial has degree {} above n = {n}",
                    c.len() - 1
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("target_monomial"));
            }
            let c = c.clone();
            LegendrePoly::from_fn(n, move |t| c.iter().rev().fold(0.0, |acc, ck| acc * t + ck))
        }
        _ => {
            return Err(Error::InvalidInput(
                "give exactly one of `target` and `target_monomial`".into(),
            ))
        }
    };
    let grid = match (&p.grid, p.grid_size) {
        (Some(g), _) => g.clone(),
        (None, Some(count)) => conecert::legendre::chebyshev_grid(count, -1.0, 1.0),
        (None, None) => conecert::shape::default_grid(n),
    };
    let problem = ShapeProblem::new(n, p.r, grid, target.clone())?;
    let res = if p.grid_only {
        project_shape_on_grid(&problem, tol)?
    } else {
        project_shape(&problem, tol)?
    };

    let scale = 1.0 + target.norm();
    let resid: Vec<f64> = target
        .coeffs
        .iter()
        .zip(&res.solution.coeffs)
        .map(|(a, b)| a - b)
        .collect();
    let orth: f64 = resid
        .iter()
        .zip(&res.solution.coeffs)
        .map(|(a, b)| a * b)
        .sum();
    let bound = (n - p.r + 2) as f64 / 2.0;
    let certificates = vec![
        Check::flag(
            "derivative_nonnegative",
            res.min_derivative_on_checkgrid,
            res.feasible_on_checkgrid,
        ),
        Check::within("contacts_vanish", res.active_residual, tol * scale),
        Check::within("residual_orthogonal", orth.abs(), tol * scale * scale),
        Check::flag("contact_bound", res.rho.len() as f64, res.bound_ok),
    ];

    let ts: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 / 100.0).collect();
    let x_vals: Vec<f64> = ts.iter().map(|&t| eval_poly(&target, t, 0)).collect();
    let s_vals: Vec<f64> = ts.iter().map(|&t| eval_poly(&res.solution, t, 0)).collect();
    let d_vals: Vec<f64> = ts
        .iter()
        .map(|&t| eval_poly(&res.solution, t, p.r))
        .collect();
    let csv = csv_vectors(
        "i,t,target,solution,solution_derivative",
        &[&ts, &x_vals, &s_vals, &d_vals],
    );
    let result = json!({
        "solution": res.solution.coeffs,
        "active_alphas": res.active_alphas,
        "rho": res.rho,
        "distance": res.distance,
        "min_derivative_on_checkgrid": res.min_derivative_on_checkgrid,
        "contacts_refined": res.contacts_refined,
        "bound_applicable": res.bound_applicable,
        "contact_limit": bound,
    });
    Ok(Outcome {
        result,
        certificates,
        csv,
    })
}

fn membership(p: &MembershipInput, tol: f64) -> Result<Outcome> {
    let d = p.x.len();
    let x = vector(&p.x);
    let gens = vectors(&p.generators, d, "generator")?;
    let scale = 1.0 + x.norm();
    let combine = |c: &Vector| {
        gens.iter()
            .zip(c.iter())
            .fold(Vector::zeros(d), |acc, (g, w)| acc + g * *w)
    };

    if p.span {
        let res = span_membership(&x, &gens, tol)?;
        let mut certificates = Vec::new();
        if let Some(c) = &res.coefficients {
            certificates.push(Check::within(
                "reconstruction",
                (combine(c) - &x).norm(),
                tol * scale,
            ));
        } else {
            let worst = gens
                .iter()
                .filter(|g| g.norm() > 0.0)
                .map(|g| res.residual.dot(g).abs() / g.norm())
                .fold(0.0, f64::max);
            certificates.push(Check::within("witness_orthogonal", worst, tol * scale));
            let sep = x.dot(&res.residual);
            certificates.push(Check::flag("witness_separates", sep, sep > 0.0));
        }
        let csv = csv_vectors("i,residual", &[res.residual.as_slice()]);
        let result = json!({
            "mode": "span",
            "member": res.member,
            "coefficients": res.coefficients.as_ref().map(list),
            "residual": list(&res.residual),
        });
        return Ok(Outcome {
            result,
            certificates,
            csv,
        });
    }

    let res = positive_relative_test(&gens, &x, tol)?;
    let mut certificates = Vec::new();
    if let Some(rho) = &res.rho {
        let neg = rho.iter().fold(0.0f64, |acc, &v| acc.max(-v));
        certificates.push(Check::within("rho_nonnegative", neg, 0.0));
        certificates.push(Check::within(
            "reconstruction",
            (combine(rho) - &x).norm(),
            tol * scale,
        ));
    }
    if let Some(w) = &res.witness {
        let wn = w.norm();
        let worst = gens
            .iter()
            .filter(|g| g.norm() > 0.0)
            .map(|g| g.dot(w) / g.norm())
            .fold(0.0, f64::max);
        certificates.push(Check::within("witness_in_polar", worst, tol * (1.0 + wn)));
        let sep = x.dot(w);
        certificates.push(Check::flag("witness_separates", sep, sep > 0.0));
    }
    let empty: Vec<f64> = Vec::new();
    let csv = csv_vectors(
        "i,rho,witness",
        &[
            res.rho.as_ref().map(|v| v.as_slice()).unwrap_or(&empty),
            res.witness.as_ref().map(|v| v.as_slice()).unwrap_or(&empty),
        ],
    );
    let result = json!({
        "mode": "cone",
        "member": res.positive,
        "rho": res.rho.as_ref().map(list),
        "witness": res.witness.as_ref().map(list),
    });
    Ok(Outcome {
        result,
        certificates,
        csv,
    })
}
