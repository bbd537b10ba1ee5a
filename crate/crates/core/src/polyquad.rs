//! Orthonormal Legendre polynomials for the uniform density 1/2 on [-1, 1]
//! and probabilist-normalized Gauss–Legendre quadrature.
//!
//! With this normalization `∫ ½ φ_i φ_j dξ = δ_ij`, so `φ_0 ≡ 1` and the
//! three-term recurrence reads `ξ φ_n = b_{n+1} φ_{n+1} + b_n φ_{n-1}` with
//! `b_n = n / √(4n² − 1)`.

use crate::error::{Error, Result};

/// Nodes and weights of a quadrature rule for the measure `½ dξ` on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Approximates `∫ ½ f(ξ) dξ`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Off-diagonal recurrence coefficient `b_n = n / √(4n² − 1)`.
pub fn recurrence_beta(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("recurrence coefficient b_0 is undefined".into()));
    }
    Ok(beta_unchecked(n))
}

#[inline]
pub(crate) fn beta_unchecked(n: usize) -> f64 {
    let n = n as f64;
    n / (4.0 * n * n - 1.0).sqrt()
}

fn check_point(xi: f64) -> Result<()> {
    if xi.is_nan() || xi.abs() > 1.0 {
        return Err(Error::Domain(format!("point {xi} outside [-1, 1]")));
    }
    Ok(())
}

/// Evaluates the orthonormal Legendre polynomial `φ_n(ξ)`.
pub fn legendre_eval(n: usize, xi: f64) -> Result<f64> {
    check_point(xi)?;
    Ok(legendre_unchecked(n, xi))
}

pub(crate) fn legendre_unchecked(n: usize, xi: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        // φ_{k+1} = (ξ φ_k − b_k φ_{k−1}) / b_{k+1}
        let bk = if k == 0 { 0.0 } else { beta_unchecked(k) };
        let next = (xi * cur - bk * prev) / beta_unchecked(k + 1);
        prev = cur;
        cur = next;
    }
    cur
}

/// Values `φ_0(ξ), …, φ_max(ξ)` in one pass of the recurrence.
pub fn legendre_values(max_degree: usize, xi: f64) -> Result<Vec<f64>> {
    check_point(xi)?;
    Ok(legendre_values_unchecked(max_degree, xi))
}

pub(crate) fn legendre_values_unchecked(max_degree: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_degree + 1);
    out.push(1.0);
    for k in 0..max_degree {
        let prev = if k == 0 { 0.0 } else { out[k - 1] };
        let bk = if k == 0 { 0.0 } else { beta_unchecked(k) };
        out.push((xi * out[k] - bk * prev) / beta_unchecked(k + 1));
    }
    out
}

/// Classical Legendre `P_m(x)` and its derivative.
fn classical_legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let m = m as f64;
    let dp = m * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `m`-point Gauss–Legendre rule with weights summing to one.
pub fn gauss_legendre(m: usize) -> Result<QuadRule> {
    if m == 0 {
        return Err(Error::Domain("quadrature needs at least one node".into()));
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        // Chebyshev-like initial guess, largest root first.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        if m % 2 == 1 && i == m / 2 {
            x = 0.0;
        }
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = classical_legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = classical_legendre(m, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 1.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        weights[m - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(QuadRule { nodes, weights })
}

/// Gauss approximation of `∫ ½ f(ξ) g(ξ) dξ`.
pub fn inner_product_oracle<F, G>(f: F, g: G, m: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let rule = gauss_legendre(m)?;
    Ok(rule.integrate(|x| f(x) * g(x)))
}
