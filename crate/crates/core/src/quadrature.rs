//! Gauss quadrature for the symmetric Jacobi weight `(1 - u^2)^beta` on `[-1, 1]`.
//!
//! Nodes are the eigenvalues of the Jacobi matrix (Golub-Welsch), found with an
//! implicit QL sweep on the tridiagonal matrix, then polished by Newton steps on
//! the orthonormal recurrence. Weights are Christoffel numbers, so no
//! eigenvectors are needed and the cost is `O(order^2)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// A quadrature rule `sum_i w_i f(x_i) ~ int_{-1}^{1} f(u) (1 - u^2)^beta du`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    order: usize,
    beta: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Builds the `order`-point Gauss rule for the weight `(1 - u^2)^beta`.
pub fn gauss_jacobi(order: usize, beta: f64) -> Result<Quadrature> {
    Quadrature::gauss_jacobi(order, beta)
}

/// Square of the off-diagonal Jacobi matrix entry `b_k`, `k >= 1`.
fn recurrence_gamma(k: usize, beta: f64) -> f64 {
    if k == 1 {
        return 1.0 / (2.0 * beta + 3.0);
    }
    let k = k as f64;
    k * (k + 2.0 * beta) / ((2.0 * k + 2.0 * beta + 1.0) * (2.0 * k + 2.0 * beta - 1.0))
}

/// Total mass of the weight `(1 - u^2)^beta`.
pub fn weight_mass(beta: f64) -> f64 {
    std::f64::consts::PI.sqrt() * gamma(beta + 1.0) / gamma(beta + 1.5)
}

impl Quadrature {
    pub fn gauss_jacobi(order: usize, beta: f64) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidParameter(format!(
                "quadrature order must be >= 2, got {order}"
            )));
        }
        if !(beta.is_finite() && beta > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "Jacobi exponent must satisfy beta > -1, got {beta}"
            )));
        }

        let off: Vec<f64> = (1..=order).map(|k| recurrence_gamma(k, beta).sqrt()).collect();
        let mut diag = vec![0.0; order];
        let mut sub = vec![0.0; order];
        sub[..order - 1].copy_from_slice(&off[..order - 1]);
        tridiagonal_eigenvalues(&mut diag, &mut sub)?;
        diag.sort_by(|a, b| a.total_cmp(b));

        let mass = weight_mass(beta);
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for &guess in &diag {
            let mut x = guess;
            for _ in 0..3 {
                let (p, dp, _) = orthonormal_at(x, order, &off);
                if dp == 0.0 {
                    break;
                }
                let step = p / dp;
                x -= step;
                if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                    break;
                }
            }
            let (_, _, sumsq) = orthonormal_at(x, order, &off);
            nodes.push(x);
            weights.push(mass / sumsq);
        }

        // The weight is even: symmetrize so odd integrands vanish to rounding.
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[j]);
            nodes[i] = -x;
            nodes[j] = x;
            weights[i] = w;
            weights[j] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }

        Ok(Quadrature {
            order,
            beta,
            nodes,
            weights,
        })
    }

    /// Plain Gauss-Legendre rule mapped onto `[lo, hi]`, returned as `(nodes, weights)`.
    pub fn legendre_on(order: usize, lo: f64, hi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let q = Quadrature::gauss_jacobi(order, 0.0)?;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let nodes = q.nodes.iter().map(|x| mid + half * x).collect();
        let weights = q.weights.iter().map(|w| half * w).collect();
        Ok((nodes, weights))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum_i w_i f(x_i)`, summed in node order.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Returns `(p_N(x), p_N'(x), sum_{k<N} p_k(x)^2)` for the orthonormal family.
fn orthonormal_at(x: f64, order: usize, off: &[f64]) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut p = 1.0;
    let mut dp_prev = 0.0;
    let mut dp = 0.0;
    let mut sumsq = 0.0;
    let mut b_prev = 0.0;
    for &b in off.iter().take(order) {
        sumsq += p * p;
        let p_next = (x * p - b_prev * p_prev) / b;
        let dp_next = (p + x * dp - b_prev * dp_prev) / b;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
        b_prev = b;
    }
    (p, dp, sumsq)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL.
/// `diag` is overwritten with the eigenvalues; `sub[i]` couples rows `i` and `i+1`.
fn tridiagonal_eigenvalues(diag: &mut [f64], sub: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if sub[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::construction(
                    "quadrature",
                    "QL iteration failed to converge",
                ));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * sub[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + sub[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * sub[i];
                let b = c * sub[i];
                r = f.hypot(g);
                sub[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    sub[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            sub[l] = g;
            sub[m] = 0.0;
        }
    }
    Ok(())
}
