//! Orthonormal Legendre polynomials on `[-1, 1]`.
//!
//! `p_k = sqrt((2k + 1) / 2) P_k` where `P_k` follows the three-term
//! recurrence `(k + 1) P_{k+1} = (2k + 1) t P_k - k P_{k-1}`. Derivatives
//! use the differentiated recurrence
//! `(k + 1) P_{k+1}^{(j)} = (2k + 1) (t P_k^{(j)} + j P_k^{(j-1)}) - k P_{k-1}^{(j)}`.

use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LegendreBasis {
    n: usize,
}

pub fn legendre_basis(n: usize) -> LegendreBasis {
    LegendreBasis { n }
}

fn norm_factor(k: usize) -> f64 {
    ((2 * k + 1) as f64 / 2.0).sqrt()
}

impl LegendreBasis {
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `p_0(t), ..., p_n(t)`
    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.eval_derivative(t, 0)
    }

    /// `p_0^{(r)}(t), ..., p_n^{(r)}(t)`
    pub fn eval_derivative(&self, t: f64, r: usize) -> Vec<f64> {
        let n = self.n;
        // table[j][k] = P_k^{(j)}(t)
        let mut table = vec![vec![0.0; n + 1]; r + 1];
        for j in 0..=r {
            if j == 0 {
                table[0][0] = 1.0;
            }
            if n >= 1 {
                table[j][1] = match j {
                    0 => t,
                    1 => 1.0,
                    _ => 0.0,
                };
            }
            for k in 1..n {
                let kf = k as f64;
                let lower = if j > 0 { table[j - 1][k] } else { 0.0 };
                table[j][k + 1] = ((2.0 * kf + 1.0) * (t * table[j][k] + j as f64 * lower)
                    - kf * table[j][k - 1])
                    / (kf + 1.0);
            }
        }
        table[r]
            .iter()
            .enumerate()
            .map(|(k, v)| v * norm_factor(k))
            .collect()
    }
}

/// Matrix of `p ↦ p^{(r)}` in orthonormal Legendre coordinates on `P_n`.
///
/// Built from `P_k' = sum_{j < k, k - j odd} (2j + 1) P_j`; the last `r`
/// rows are zero.
pub fn derivative_matrix(n: usize, r: usize) -> Matrix {
    let mut d1 = Matrix::zeros(n + 1, n + 1);
    for k in 1..=n {
        for j in (0..k).rev().step_by(2) {
            d1[(j, k)] = norm_factor(k) * (2 * j + 1) as f64 / norm_factor(j);
        }
    }
    let mut out = Matrix::identity(n + 1, n + 1);
    for _ in 0..r {
        out = &d1 * out;
    }
    out
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, exact for degree
/// `2 * npts - 1`. Nodes ascend.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; npts];
    let mut weights = vec![0.0; npts];
    let nf = npts as f64;
    for i in 0..npts {
        let mut t = -(std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(npts, t);
            dp = nf * (t * p - p_prev) / (t * t - 1.0);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (p, p_prev) = legendre_pair(npts, t);
        dp = if (t * t - 1.0).abs() > 0.0 {
            nf * (t * p - p_prev) / (t * t - 1.0)
        } else {
            dp
        };
        nodes[i] = t;
        weights[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (nodes, weights)
}

/// Unnormalized `(P_n(t), P_{n-1}(t))`.
fn legendre_pair(n: usize, t: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * t * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Chebyshev–Lobatto points `cos(pi j / (count - 1))` mapped to `[a, b]`,
/// ascending and including both endpoints.
pub fn chebyshev_grid(count: usize, a: f64, b: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => {
            let last = (count - 1) as f64;
            let mut g: Vec<f64> = (0..count)
                .map(|j| {
                    let s = -(std::f64::consts::PI * j as f64 / last).cos();
                    0.5 * (a + b) + 0.5 * (b - a) * s
                })
                .collect();
            g[0] = a;
            g[count - 1] = b;
            if count % 2 == 1 {
                g[count / 2] = 0.5 * (a + b);
            }
            g
        }
    }
}
