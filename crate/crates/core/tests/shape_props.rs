mod common;

use common::oracle_dual_projection;
use conecert::legendre::chebyshev_grid;
use conecert::linalg::Vector;
use conecert::shape::{
    eval_poly, project_shape, project_shape_on_grid, representer, LegendrePoly, ShapeProblem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const TOL: f64 = 1e-9;

fn random_problem(rng: &mut ChaCha8Rng, max_n: usize) -> ShapeProblem {
    let n = rng.random_range(1..=max_n);
    let r = rng.random_range(0..n);
    let c: Vec<f64> = (0..=n).map(|_| rng.sample(StandardNormal)).collect();
    ShapeProblem::with_default_grid(n, r, LegendrePoly::new(c).unwrap()).unwrap()
}

fn inner(a: &LegendrePoly, b: &LegendrePoly) -> f64 {
    a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).sum()
}

fn factorial(r: usize) -> f64 {
    (1..=r).map(|k| k as f64).product()
}

#[test]
fn solutions_are_feasible_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..60 {
        let p = random_problem(&mut rng, 8);
        let res = project_shape(&p, TOL).unwrap();
        let worst = (0..=4000)
            .map(|i| eval_poly(&res.solution, -1.0 + i as f64 / 2000.0, p.r))
            .fold(f64::INFINITY, f64::min);
        assert!(worst >= -1e-7, "n={} r={} worst={worst:e}", p.n, p.r);
        assert!(res.feasible_on_checkgrid);
    }
}

#[test]
fn variational_inequality_against_feasible_polynomials() {
    // for every q in C: <x - x0, q> <= 0, and <x - x0, x0> = 0
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for _ in 0..60 {
        let p = random_problem(&mut rng, 8);
        let (n, r) = (p.n, p.r);
        let res = project_shape(&p, TOL).unwrap();
        let resid = LegendrePoly {
            coeffs: p
                .target
                .coeffs
                .iter()
                .zip(&res.solution.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        };
        let s = 1.0 + p.target.norm();
        assert!(inner(&resid, &res.solution).abs() <= 1e-8 * s * s);

        let mut probes: Vec<LegendrePoly> = Vec::new();
        for j in r..=n {
            probes.push(LegendrePoly::from_fn(n, move |t| (1.0 + t).powi(j as i32)));
            if (j - r) % 2 == 0 {
                probes.push(LegendrePoly::from_fn(n, move |t| {
                    (1.0 - t).powi(j as i32) * if r % 2 == 1 { -1.0 } else { 1.0 }
                }));
            }
        }
        if r + 2 <= n {
            for k in 0..9 {
                let c = -1.0 + k as f64 * 0.25;
                let scale = 2.0 / factorial(r + 2);
                probes.push(LegendrePoly::from_fn(n, move |t| {
                    scale * (t - c).powi(r as i32 + 2)
                }));
            }
        }
        for q in &probes {
            let qn = q.norm();
            assert!(inner(&resid, q) <= 1e-8 * s * (1.0 + qn), "n={n} r={r}");
        }
    }
}

#[test]
fn grid_solve_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..200 {
        let n = rng.random_range(1..=3);
        let r = rng.random_range(0..n);
        let count = rng.random_range(n + 1..=8);
        let grid = chebyshev_grid(count, -1.0, 1.0);
        let c: Vec<f64> = (0..=n).map(|_| rng.sample(StandardNormal)).collect();
        let p =
            ShapeProblem::new(n, r, grid.clone(), LegendrePoly::new(c.clone()).unwrap()).unwrap();
        let res = project_shape_on_grid(&p, TOL).unwrap();
        let gens: Vec<Vector> = grid
            .iter()
            .map(|&a| Vector::from_vec(representer(n, r, a).coeffs))
            .collect();
        let want = oracle_dual_projection(&gens, &Vector::from_vec(c));
        let got = Vector::from_vec(res.solution.coeffs);
        assert!((got - &want).norm() <= 1e-8 * (1.0 + want.norm()));
    }
}

#[test]
fn refining_the_grid_only_moves_away() {
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    for _ in 0..40 {
        let n = rng.random_range(2..=6);
        let r = rng.random_range(0..n);
        let c: Vec<f64> = (0..=n).map(|_| rng.sample(StandardNormal)).collect();
        let target = LegendrePoly::new(c).unwrap();
        let mut last = -1.0;
        let mut count = n + 2;
        for _ in 0..4 {
            let p =
                ShapeProblem::new(n, r, chebyshev_grid(count, -1.0, 1.0), target.clone()).unwrap();
            let d = project_shape_on_grid(&p, TOL).unwrap().distance;
            assert!(d >= last - 1e-9 * (1.0 + target.norm()));
            last = d;
            count = 2 * count - 1;
        }
        let p = ShapeProblem::with_default_grid(n, r, target.clone()).unwrap();
        let full = project_shape(&p, TOL).unwrap();
        // the continuum cone is the smallest of all
        assert!(full.distance >= last - 1e-9 * (1.0 + target.norm()));
    }
}

#[test]
fn contact_count_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut applicable = 0;
    for _ in 0..100 {
        let p = random_problem(&mut rng, 8);
        let res = project_shape(&p, TOL).unwrap();
        if res.bound_applicable {
            applicable += 1;
            assert!(2 * res.rho.len() <= p.n - p.r + 2);
        }
        assert!(res.rho.iter().all(|&w| w > 0.0));
        assert!(res.active_residual <= 1e-8 * (1.0 + p.target.norm()));
    }
    assert!(applicable > 30);
}

#[test]
fn monomial_against_representer_is_factorial() {
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    for n in 1..=8usize {
        for r in 0..=3usize.min(n) {
            let mono = LegendrePoly::from_fn(n, |t| t.powi(r as i32));
            for _ in 0..50 {
                let a = rng.random_range(-1.0..=1.0);
                let got = inner(&mono, &representer(n, r, a));
                assert!((got - factorial(r)).abs() <= 1e-8 * factorial(r));
            }
        }
    }
}
