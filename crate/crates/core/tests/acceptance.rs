//! End-to-end acceptance run. Prints one line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use conecert::batch::{self, ConeInstance};
use conecert::cone::{
    null_range_decompose, project_dual, project_generated, project_orthonormal,
    verify_characterization,
};
use conecert::farkas::{verify_outcome, FarkasOutcome};
use conecert::linalg::{nnls, Matrix, Vector};
use conecert::quadrature::{apply_rule, integral_moments, positive_quadrature, verify_exactness};
use conecert::shape::{eval_poly, project_shape, representer, LegendrePoly, ShapeProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn worked_example() -> Outcome {
    let gens = vec![
        Vector::from_vec(vec![0.0, -1.0]),
        Vector::from_vec(vec![1.0, 1.0]),
    ];
    let x = Vector::from_vec(vec![2.0, 1.0]);
    let start = Instant::now();
    let proj = project_dual(&gens, &x, TOL).unwrap();
    let report = verify_characterization(&gens, &x, &proj.point, TOL).unwrap();
    let elapsed = start.elapsed();

    let err = (&proj.point - Vector::from_vec(vec![2.0, 0.0]))
        .amax()
        .max((&proj.rho - Vector::from_vec(vec![1.0, 0.0])).amax());
    let pass = err <= 1e-10
        && proj.active == vec![0]
        && report.all_pass()
        && report.active == vec![0]
        && elapsed < Duration::from_millis(1);
    outcome(
        pass,
        format!(
            "x0={:?} rho={:?} err={err:.1e} checks={} in {:.3} ms",
            proj.point.as_slice(),
            proj.rho.as_slice(),
            report.checks.iter().filter(|c| c.pass).count(),
            ms(elapsed)
        ),
    )
}

fn moreau_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let instances: Vec<ConeInstance> = (0..1000)
        .map(|_| {
            let d = rng.random_range(1..=8);
            let m = rng.random_range(1..=10);
            ConeInstance {
                generators: gaussian_gens(&mut rng, d, m),
                x: gaussian_vec(&mut rng, d),
            }
        })
        .collect();
    let start = Instant::now();
    let splits = batch::moreau_all(&instances, TOL);
    let elapsed = start.elapsed();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for (inst, split) in instances.iter().zip(splits) {
        let split = split.unwrap();
        let s = 1.0 + inst.x.norm_squared();
        // residuals recomputed here rather than read from the split
        let id = (&split.pc + &split.pdual - &inst.x).norm() / s;
        let orth = split.pc.dot(&split.pdual).abs() / s;
        worst = worst.max(id).max(orth);
        if id > 1e-9 || orth > 1e-9 {
            failures += 1;
        }
    }
    let pass = failures == 0 && elapsed < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "1000 instances, worst scaled residual {worst:.1e}, {failures} failures, {:.0} ms",
            ms(elapsed)
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let instances: Vec<ConeInstance> = (0..500)
        .map(|_| {
            let d = rng.random_range(1..=6);
            let m = rng.random_range(1..=8);
            ConeInstance {
                generators: gaussian_gens(&mut rng, d, m),
                x: gaussian_vec(&mut rng, d),
            }
        })
        .collect();
    let start = Instant::now();
    let gaps = batch::map(&instances, |inst| {
        let got = project_generated(&inst.generators, &inst.x, TOL).unwrap();
        let want = oracle_cone_projection(&inst.generators, &inst.x);
        let f = |p: &Vector| 0.5 * (&inst.x - p).norm_squared();
        (f(&got.point) - f(&want)).abs()
    });
    let elapsed = start.elapsed();
    let worst = gaps.iter().cloned().fold(0.0, f64::max);
    let pass = worst <= 1e-9 && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "500 instances, worst objective gap {worst:.1e}, {:.0} ms",
            ms(elapsed)
        ),
    )
}

fn orthonormal_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.random_range(1..=8);
        let m = rng.random_range(1..=d);
        let q = gaussian_mat(&mut rng, d, m).qr().q();
        let gens: Vec<Vector> = (0..m).map(|j| q.column(j).into_owned()).collect();
        let x = gaussian_vec(&mut rng, d);
        let closed = project_orthonormal(&gens, &x).unwrap();
        let general = project_dual(&gens, &x, TOL).unwrap();
        worst = worst.max((&closed.point - &general.point).norm());
    }
    outcome(
        worst <= 1e-9,
        format!("200 QR systems, worst deviation {worst:.1e}"),
    )
}

fn farkas_exclusivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut both, mut neither, mut s1, mut s2) = (0, 0, 0, 0);
    for _ in 0..1000 {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(1..=6);
        let a: Matrix = gaussian_mat(&mut rng, m, n);
        let b = if rng.random_bool(0.5) {
            a.tr_mul(&Vector::from_fn(m, |_, _| rng.random_range(0.0..2.0)))
        } else {
            gaussian_vec(&mut rng, n)
        };
        // best candidate for each system from the same NNLS solve
        let sol = nnls(&a.transpose(), &b, TOL).unwrap();
        let v1 = verify_outcome(&a, &b, &FarkasOutcome::system1(&a, &b, sol.rho), TOL);
        let v2 = verify_outcome(&a, &b, &FarkasOutcome::system2(&a, &b, sol.residual), TOL);
        match (v1, v2) {
            (true, true) => both += 1,
            (false, false) => neither += 1,
            (true, false) => s1 += 1,
            (false, true) => s2 += 1,
        }
    }
    outcome(
        both == 0 && neither == 0,
        format!("1000 systems: {s1} System 1, {s2} System 2, both {both}, neither {neither}"),
    )
}

fn quadrature_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = Instant::now();
    let mut worst_basis = 0.0f64;
    let mut worst_poly = 0.0f64;
    let mut structural = true;
    for &(a, b) in &[(-1.0f64, 1.0f64), (0.0, 3.0)] {
        for n in 0..=10usize {
            let spec = integral_moments(n, a, b).unwrap();
            let rule = match positive_quadrature(&spec, 16 * (n + 1)) {
                Ok(r) => r,
                Err(_) => {
                    structural = false;
                    continue;
                }
            };
            structural &= rule.nodes.len() <= n + 1 && rule.weights.iter().all(|&w| w > 0.0);
            worst_basis = worst_basis.max(verify_exactness(&rule, n).unwrap());
            for _ in 0..100 {
                let c: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let exact: f64 = c
                    .iter()
                    .enumerate()
                    .map(|(k, ck)| {
                        ck * (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k + 1) as f64
                    })
                    .sum();
                let q = apply_rule(&rule, |t| c.iter().rev().fold(0.0, |acc, ck| acc * t + ck));
                let scale = 1.0
                    + c.iter()
                        .enumerate()
                        .map(|(k, ck)| ck.abs() * a.abs().max(b.abs()).powi(k as i32) * (b - a))
                        .sum::<f64>();
                worst_poly = worst_poly.max((q - exact).abs() / scale);
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = structural
        && worst_basis <= 1e-8
        && worst_poly <= 1e-7
        && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "n=0..10 on [-1,1] and [0,3]: basis error {worst_basis:.1e}, polynomial error {worst_poly:.1e}, {:.0} ms",
            ms(elapsed)
        ),
    )
}

fn shape_line() -> Outcome {
    // brute force over p(t) = a t + b with b >= |a|, step 1e-3
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in -1000..=1000 {
        for j in -1000..=1000 {
            let (a, b) = (i as f64 * 1e-3, j as f64 * 1e-3);
            if b < a.abs() {
                continue;
            }
            // int_{-1}^{1} (t - a t - b)^2 dt
            let obj = (1.0 - a).powi(2) * 2.0 / 3.0 + 2.0 * b * b;
            if obj < best.0 {
                best = (obj, a, b);
            }
        }
    }
    let brute_ok = (best.1 - 0.25).abs() <= 1e-3 && (best.2 - 0.25).abs() <= 1e-3;

    let target = LegendrePoly::from_fn(1, |t| t);
    let prob = ShapeProblem::with_default_grid(1, 0, target).unwrap();
    let res = project_shape(&prob, TOL).unwrap();
    let err = (0..=200)
        .map(|i| {
            let t = -1.0 + i as f64 / 100.0;
            (eval_poly(&res.solution, t, 0) - (t + 1.0) / 4.0).abs()
        })
        .fold(0.0, f64::max);
    outcome(
        brute_ok && err <= 1e-6,
        format!(
            "brute force optimum ({:.3}, {:.3}), max |x0 - (t+1)/4| = {err:.1e}",
            best.1, best.2
        ),
    )
}

fn reproducing_monomials() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for n in 1..=8usize {
        for r in 0..=3usize.min(n) {
            let mono = LegendrePoly::from_fn(n, |t| t.powi(r as i32));
            let fact: f64 = (1..=r).map(|k| k as f64).product();
            for _ in 0..50 {
                let alpha = rng.random_range(-1.0..=1.0);
                let k = representer(n, r, alpha);
                let ip: f64 = mono.coeffs.iter().zip(&k.coeffs).map(|(a, b)| a * b).sum();
                worst = worst.max((ip - fact).abs() / fact);
            }
        }
    }
    outcome(
        worst <= 1e-8,
        format!("n<=8, r<=3, 50 points each: worst relative error {worst:.1e}"),
    )
}

fn contact_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut tested, mut violations, mut drawn) = (0, 0, 0);
    let mut worst_ratio = 0.0f64;
    while tested < 100 {
        drawn += 1;
        let n = rng.random_range(1..=8usize);
        let r = rng.random_range(0..n);
        let c: Vec<f64> = (0..=n).map(|_| rng.sample(StandardNormal)).collect();
        let prob = ShapeProblem::with_default_grid(n, r, LegendrePoly::new(c).unwrap()).unwrap();
        let res = project_shape(&prob, TOL).unwrap();
        let vanishing = (0..=100)
            .map(|i| eval_poly(&res.solution, -1.0 + i as f64 / 50.0, r).abs())
            .fold(0.0, f64::max)
            <= 1e-8;
        if vanishing {
            continue;
        }
        tested += 1;
        let m = res.rho.len();
        worst_ratio = worst_ratio.max(2.0 * m as f64 / (n - r + 2) as f64);
        if 2 * m > n - r + 2 {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{tested} problems ({drawn} drawn), {violations} violations, max m / bound = {worst_ratio:.2}"),
    )
}

fn null_range_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failed = 0;
    let mut worst = 0.0f64;
    for _ in 0..300 {
        let d = rng.random_range(1..=6);
        let m = rng.random_range(1..=8);
        let gens = gaussian_gens(&mut rng, d, m);
        let x = gaussian_vec(&mut rng, d);
        let z = null_range_decompose(&gens, &x, TOL).unwrap();
        worst = worst.max(z.checks.iter().map(|c| c.residual).fold(0.0, f64::max));
        if !z.all_pass() {
            failed += 1;
        }
    }
    outcome(
        failed == 0,
        format!("300 instances, {failed} failed, worst residual {worst:.1e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("worked example", worked_example),
        ("moreau decomposition", moreau_suite),
        ("oracle equivalence", oracle_equivalence),
        ("orthonormal closed form", orthonormal_closed_form),
        ("farkas exclusivity", farkas_exclusivity),
        ("positive quadrature", quadrature_suite),
        ("shape: nonnegative line", shape_line),
        ("reproducing monomials", reproducing_monomials),
        ("contact count bound", contact_bound),
        ("null-space / range decomposition", null_range_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2} {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
