//! Truncated Karhunen–Loève expansion of a random field on the unit square
//! with separable exponential covariance
//! `σ² exp(−|x₁ − y₁|/c − |x₂ − y₂|/c)`.
//!
//! The 1-D factor `exp(−|x − y|/c)` on [0, 1] has closed-form eigenpairs.
//! Recentring to [−½, ½], the frequencies solve
//!
//! * even modes: `ω tan(ω/2) = 1/c`, eigenfunction `cos(ω(x − ½))`
//! * odd modes: `ω + tan(ω/2)/c = 0`, eigenfunction `sin(ω(x − ½))`
//!
//! with eigenvalue `2c / (1 + c²ω²)`. The `m`-th frequency (1-based) lies in
//! `((m − 1)π, mπ)`, even and odd families alternating.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::Grid2d;

const BISECTION_STEPS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// One eigenpair of the unit-variance 1-D exponential kernel on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kl1dMode {
    pub omega: f64,
    pub lambda: f64,
    pub parity: Parity,
    /// L²(0,1) norm of the unnormalized cos/sin profile.
    pub norm: f64,
    corr_len: f64,
}

impl Kl1dMode {
    /// L²-normalized eigenfunction at `x ∈ [0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let t = self.omega * (x - 0.5);
        match self.parity {
            Parity::Even => t.cos() / self.norm,
            Parity::Odd => t.sin() / self.norm,
        }
    }

    /// Pole-free residual of the transcendental equation, scaled by
    /// `ω + 1/c` so it is comparable across modes.
    pub fn residual(&self) -> f64 {
        let (w, inv_c) = (self.omega, 1.0 / self.corr_len);
        let (s, c) = (0.5 * w).sin_cos();
        let r = match self.parity {
            Parity::Even => w * s - inv_c * c,
            Parity::Odd => w * c + inv_c * s,
        };
        r / (w + inv_c)
    }

    /// Bracket `((m − 1)π, mπ)` the frequency must lie in, for 1-based `m`.
    pub fn bracket(mode_number: usize) -> (f64, f64) {
        ((mode_number as f64 - 1.0) * PI, mode_number as f64 * PI)
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Internal(format!("bracket [{lo}, {hi}] has no sign change")));
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The `n` largest eigenpairs of `exp(−|x − y|/c)` on [0, 1].
pub fn kl_1d(corr_len: f64, n: usize) -> Result<Vec<Kl1dMode>> {
    if !(corr_len > 0.0) || !corr_len.is_finite() {
        return Err(Error::Domain(format!("correlation length must be positive, got {corr_len}")));
    }
    if n == 0 {
        return Err(Error::Domain("need at least one KL mode".into()));
    }
    let inv_c = 1.0 / corr_len;
    (1..=n)
        .map(|m| {
            let (lo, hi) = Kl1dMode::bracket(m);
            let (parity, omega) = if m % 2 == 1 {
                let w = bisect(|w| w * (0.5 * w).sin() - inv_c * (0.5 * w).cos(), lo, hi)?;
                (Parity::Even, w)
            } else {
                let w = bisect(|w| w * (0.5 * w).cos() + inv_c * (0.5 * w).sin(), lo, hi)?;
                (Parity::Odd, w)
            };
            let half_sinc = if omega == 0.0 { 0.5 } else { omega.sin() / (2.0 * omega) };
            let norm = match parity {
                Parity::Even => (0.5 + half_sinc).sqrt(),
                Parity::Odd => (0.5 - half_sinc).sqrt(),
            };
            let lambda = 2.0 * corr_len / (1.0 + corr_len * corr_len * omega * omega);
            Ok(Kl1dMode { omega, lambda, parity, norm, corr_len })
        })
        .collect()
}

/// One retained 2-D mode: product of 1-D modes `i` (along `x₁`) and `j`
/// (along `x₂`), both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kl2dMode {
    pub i: usize,
    pub j: usize,
    /// Eigenvalue including the `σ²` factor.
    pub lambda: f64,
    pub omega1: f64,
    pub omega2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub corr_len: f64,
    pub sigma: f64,
    pub mean: f64,
    pub n_modes: usize,
}

/// Affine coefficient `a(x, ξ) = a₀(x) + Σ_m a_m(x) ξ_m` sampled on every
/// grid node (boundary included, row-major).
#[derive(Debug, Clone)]
pub struct KlField {
    pub params: FieldParams,
    pub grid: Grid2d,
    pub a0: Vec<f64>,
    pub modes: Vec<Vec<f64>>,
    pub eigen: Vec<Kl2dMode>,
}

/// Selects the `n` largest products of the 1-D pool (ties broken by lower
/// `(i, j)` first) and checks that nothing outside the pool could compete.
fn select_products(pool: &[Kl1dMode], n: usize) -> Option<Vec<(usize, usize, f64)>> {
    let m = pool.len() - 1; // last entry only bounds the tail
    let mut products: Vec<(usize, usize, f64)> = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            products.push((i, j, pool[i].lambda * pool[j].lambda));
        }
    }
    products.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| (a.0, a.1).cmp(&(b.0, b.1))));
    products.truncate(n);
    let smallest = products.last()?.2;
    let tail_bound = pool[0].lambda * pool[m].lambda;
    (tail_bound < smallest).then_some(products)
}

/// Builds the `n_modes`-term field on `grid` with constant mean.
pub fn kl_2d(params: FieldParams, grid: Grid2d) -> Result<KlField> {
    let FieldParams { corr_len, sigma, mean, n_modes } = params;
    if n_modes == 0 {
        return Err(Error::Domain("need at least one KL mode".into()));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() || !mean.is_finite() {
        return Err(Error::Domain(format!("invalid field parameters sigma={sigma} mean={mean}")));
    }
    let mut pool_size = (2 * n_modes).max(20);
    let (pool, chosen) = loop {
        let pool = kl_1d(corr_len, pool_size + 1)?;
        if let Some(chosen) = select_products(&pool, n_modes) {
            break (pool, chosen);
        }
        pool_size *= 2;
        if pool_size > 1 << 16 {
            return Err(Error::Internal("KL pool did not stabilise".into()));
        }
    };

    let n = grid.cells();
    let coords: Vec<f64> = (0..=n).map(|k| k as f64 * grid.h()).collect();
    let mut eigen = Vec::with_capacity(n_modes);
    let mut modes = Vec::with_capacity(n_modes);
    for &(i, j, prod) in &chosen {
        let lambda = sigma * sigma * prod;
        let scale = lambda.sqrt();
        let fx: Vec<f64> = coords.iter().map(|&x| pool[i].eval(x)).collect();
        let fy: Vec<f64> = coords.iter().map(|&y| pool[j].eval(y)).collect();
        let mut values = Vec::with_capacity(grid.n_nodes());
        for vy in &fy {
            for vx in &fx {
                values.push(scale * vx * vy);
            }
        }
        modes.push(values);
        eigen.push(Kl2dMode { i, j, lambda, omega1: pool[i].omega, omega2: pool[j].omega });
    }
    Ok(KlField { params, grid, a0: vec![mean; grid.n_nodes()], modes, eigen })
}

impl KlField {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// `a(x_node, ξ)` for an all-node index.
    pub fn field_eval(&self, xi: &[f64], node: usize) -> Result<f64> {
        if xi.len() != self.modes.len() {
            return Err(Error::Input(format!(
                "sample has {} components, field has {} modes",
                xi.len(),
                self.modes.len()
            )));
        }
        if node >= self.a0.len() {
            return Err(Error::Input(format!("node {node} out of range")));
        }
        Ok(self.a0[node] + self.modes.iter().zip(xi).map(|(m, x)| m[node] * x).sum::<f64>())
    }

    /// `min_x a₀(x) − Σ_m |a_m(x)|`, a lower bound of the coefficient over
    /// the whole parameter box.
    pub fn positivity_report(&self) -> f64 {
        (0..self.a0.len())
            .map(|k| self.a0[k] - self.modes.iter().map(|m| m[k].abs()).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// Fraction of the total field variance `σ²` captured by the first
    /// `k` modes, for `k = 1..=N`.
    pub fn cumulative_variance_fraction(&self) -> Vec<f64> {
        let total = self.params.sigma * self.params.sigma;
        let mut acc = 0.0;
        self.eigen
            .iter()
            .map(|e| {
                acc += e.lambda;
                if total > 0.0 {
                    acc / total
                } else {
                    0.0
                }
            })
            .collect()
    }
}
