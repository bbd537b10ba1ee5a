//! Independent reference computations shared by the integration suites.
//!
//! Nothing here calls the library's own polynomial, quadrature or solver
//! code: Gauss rules come from a Golub–Welsch eigensolve, Legendre values
//! from the classical Bonnet recurrence, and linear systems from dense
//! Gaussian elimination.

#![allow(dead_code)]

use aasg_core::galerkin::PhysicalSystem;
use aasg_core::multiindex::{IndexCatalog, MultiIndex};
use aasg_core::sparsela::SparseMatrix;
use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss–Legendre rule on [−1, 1] for the probability measure `dξ/2`,
/// via the eigen-decomposition of the monic Jacobi matrix.
pub fn golub_welsch(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..m).map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Orthonormal Legendre value `√(2n+1) P_n(x)` from Bonnet's recurrence.
pub fn legendre_bonnet(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (2.0 * n as f64 + 1.0).sqrt() * p1
}

pub fn basis_value(index: &MultiIndex, xi: &[f64]) -> f64 {
    index.degrees().iter().zip(xi).map(|(&d, &x)| legendre_bonnet(d as usize, x)).product()
}

/// Tensor-product rule in `dim` variables: `(points, weights)`.
pub fn tensor_rule(dim: usize, per_axis: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (x, w) = golub_welsch(per_axis);
    let total = per_axis.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let mut pt = Vec::with_capacity(dim);
        let mut wt = 1.0;
        for _ in 0..dim {
            pt.push(x[c % per_axis]);
            wt *= w[c % per_axis];
            c /= per_axis;
        }
        points.push(pt);
        weights.push(wt);
    }
    (points, weights)
}

/// `⟨Θ_m Φ_j Φ_k⟩` with `Θ_0 = 1`, `Θ_m = ξ_m`, by tensor quadrature.
pub fn g_matrix_oracle(catalog: &IndexCatalog, m: usize) -> Vec<Vec<f64>> {
    let dim = catalog.dim();
    let per_axis = catalog.max_degree_per_dim() as usize + 2;
    let (points, weights) = tensor_rule(dim, per_axis);
    let n = catalog.len();
    let mut g = vec![vec![0.0; n]; n];
    for (pt, w) in points.iter().zip(&weights) {
        let phi: Vec<f64> = catalog.entries().iter().map(|idx| basis_value(idx, pt)).collect();
        let theta = if m == 0 { 1.0 } else { pt[m - 1] };
        for j in 0..n {
            if phi[j] == 0.0 {
                continue;
            }
            for k in 0..n {
                g[j][k] += w * theta * phi[j] * phi[k];
            }
        }
    }
    g
}

/// Explicit `Σ_m G_m ⊗ A_m` with `G_m` from the quadrature oracle.
pub fn dense_galerkin_matrix(system: &PhysicalSystem, catalog: &IndexCatalog) -> Vec<Vec<f64>> {
    let ns = catalog.len();
    let np = system.n_phy();
    let mut out = vec![vec![0.0; ns * np]; ns * np];
    for (m, a) in system.stiffness.iter().enumerate() {
        let g = g_matrix_oracle(catalog, m);
        let ad = a.to_dense();
        for j in 0..ns {
            for k in 0..ns {
                if g[j][k].abs() < 1e-15 {
                    continue;
                }
                for s in 0..np {
                    for t in 0..np {
                        out[j * np + s][k * np + t] += g[j][k] * ad[s][t];
                    }
                }
            }
        }
    }
    out
}

pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &bi)| r.iter().copied().chain([bi]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for c in col..=n {
                    m[row][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| m[row][c] * x[c]).sum();
        x[row] = (m[row][n] - s) / m[row][row];
    }
    x
}

pub fn sparse_to_dense(a: &SparseMatrix) -> Vec<Vec<f64>> {
    a.to_dense()
}

/// Unit-variance 1-D eigenvalues of `exp(−|x−y|/c)` on [0, 1] from a
/// trapezoid Nyström discretisation with `intervals` cells, largest first.
pub fn nystrom_trapezoid(corr_len: f64, intervals: usize) -> Vec<f64> {
    let n = intervals;
    let h = 1.0 / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let mut w = vec![h; n + 1];
    w[0] = h / 2.0;
    w[n] = h / 2.0;
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let k = DMatrix::from_fn(n + 1, n + 1, |i, j| sw[i] * sw[j] * (-(xs[i] - xs[j]).abs() / corr_len).exp());
    let mut ev: Vec<f64> = SymmetricEigen::new(k).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Nyström eigenvalues on `points` and `points / 2` intervals combined by
/// one Richardson step. The kernel's kink lies on the nodes, so the
/// trapezoid error expands in even powers of `h`.
pub fn nystrom_eigenvalues(corr_len: f64, points: usize) -> Vec<f64> {
    let fine = nystrom_trapezoid(corr_len, points);
    let coarse = nystrom_trapezoid(corr_len, points / 2);
    fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
}

/// Relative lumped-mass distance between two fields on the same grid.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

pub fn max_relative_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// gPC coefficients of every ANOVA component of `u` on the full
/// total-degree-`p` space, by tensor quadrature with `per_axis` nodes.
///
/// Components follow the inclusion–exclusion form
/// `u_T = Σ_{S ⊆ T} (−1)^{|T|−|S|} E[u | ξ_S]`; the result lists, for each
/// subset `T` (as a bit mask over the variables), the coefficient of every
/// catalog entry.
pub fn anova_gpc_projection<F: Fn(&[f64]) -> f64>(
    u: F,
    dim: usize,
    p: u32,
    per_axis: usize,
) -> (IndexCatalog, Vec<Vec<f64>>) {
    let (x, w) = golub_welsch(per_axis);
    let total = per_axis.pow(dim as u32);
    let digits = |code: usize| -> Vec<usize> {
        let mut c = code;
        (0..dim)
            .map(|_| {
                let d = c % per_axis;
                c /= per_axis;
                d
            })
            .collect()
    };
    let values: Vec<f64> = (0..total).map(|code| u(&digits(code).iter().map(|&d| x[d]).collect::<Vec<_>>())).collect();

    // E[u | ξ_S] on the full grid, averaging out the axes outside S
    let conditional = |mask: usize| -> Vec<f64> {
        let mut out = vec![0.0; total];
        for code in 0..total {
            let dg = digits(code);
            let mut acc = 0.0;
            let free: Vec<usize> = (0..dim).filter(|a| mask & (1 << a) == 0).collect();
            let inner = per_axis.pow(free.len() as u32);
            for sub in 0..inner {
                let mut c = sub;
                let mut pt = dg.clone();
                let mut wt = 1.0;
                for &a in &free {
                    pt[a] = c % per_axis;
                    wt *= w[c % per_axis];
                    c /= per_axis;
                }
                let lin = pt.iter().rev().fold(0, |l, &d| l * per_axis + d);
                acc += wt * values[lin];
            }
            out[code] = acc;
        }
        out
    };
    let cond: Vec<Vec<f64>> = (0..1usize << dim).map(conditional).collect();

    let catalog = IndexCatalog::full(dim, p).unwrap();
    let weights: Vec<f64> = (0..total).map(|code| digits(code).iter().map(|&d| w[d]).product()).collect();
    let basis: Vec<Vec<f64>> = (0..total)
        .map(|code| {
            let pt: Vec<f64> = digits(code).iter().map(|&d| x[d]).collect();
            catalog.entries().iter().map(|idx| basis_value(idx, &pt)).collect()
        })
        .collect();

    let mut coeffs = Vec::with_capacity(1 << dim);
    for t in 0..1usize << dim {
        let mut comp = vec![0.0; total];
        let mut s = t;
        loop {
            let sign = if (t.count_ones() - s.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
            for (c, v) in comp.iter_mut().zip(&cond[s]) {
                *c += sign * v;
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & t;
        }
        let mut c = vec![0.0; catalog.len()];
        for code in 0..total {
            let f = weights[code] * comp[code];
            for (cj, phi) in c.iter_mut().zip(&basis[code]) {
                *cj += f * phi;
            }
        }
        coeffs.push(c);
    }
    (catalog, coeffs)
}
