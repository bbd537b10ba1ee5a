use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{dot, norm, LinearOperator, Preconditioner};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Target for `‖b − Op·x‖ / ‖b‖`.
    pub tol: f64,
    pub maxit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, maxit: 1000 }
    }
}

impl SolverOptions {
    /// Default iteration cap for a Galerkin system with `n_stoch` blocks.
    pub fn for_blocks(tol: f64, n_stoch: usize) -> Self {
        SolverOptions { tol, maxit: (10 * n_stoch).max(1000) }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// True residual `‖b − Op·x‖ / ‖b‖` of the returned iterate.
    pub relative_residual: f64,
    pub converged: bool,
    pub seconds: f64,
    /// Preconditioned residual norm `√(rᵀ M⁻¹ r) / ‖b‖` per iteration (CG only).
    #[serde(skip)]
    pub history: Vec<f64>,
}

fn true_residual<O: LinearOperator + ?Sized>(op: &O, b: &[f64], x: &[f64], r: &mut [f64]) -> f64 {
    op.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    norm(r)
}

fn check_finite(v: f64, iterations: usize, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Breakdown { iterations, reason: format!("non-finite {what}") })
    }
}

fn check_dims<O: LinearOperator + ?Sized>(op: &O, b: &[f64], x0: Option<&[f64]>) -> Result<()> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::Input(format!("rhs length {} for operator of size {n}", b.len())));
    }
    if let Some(x0) = x0 {
        if x0.len() != n {
            return Err(Error::Input(format!("initial guess length {} for operator of size {n}", x0.len())));
        }
    }
    Ok(())
}

/// Preconditioned conjugate gradients.
///
/// Stops when the recursively updated residual meets `tol`, then confirms
/// against the true residual and restarts from it if the two have drifted.
/// Returns `converged = false` (not an error) when `maxit` is reached.
pub fn cg<O, P>(op: &O, pre: &P, b: &[f64], x0: Option<&[f64]>, opts: SolverOptions) -> Result<(Vec<f64>, SolveReport)>
where
    O: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    check_dims(op, b, x0)?;
    let start = Instant::now();
    let n = op.dim();
    let bnorm = norm(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut report = SolveReport::default();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        report.converged = true;
        report.seconds = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }

    let mut r = vec![0.0; n];
    let mut rel = true_residual(op, b, &x, &mut r) / bnorm;
    check_finite(rel, 0, "initial residual")?;
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut iterations = 0;
    let mut restarts = 0;

    'outer: while rel > opts.tol && iterations < opts.maxit {
        pre.apply(&r, &mut z);
        let mut rz = dot(&r, &z);
        check_finite(rz, iterations, "preconditioned residual")?;
        p.copy_from_slice(&z);
        while iterations < opts.maxit {
            iterations += 1;
            op.apply(&p, &mut q);
            let pq = dot(&p, &q);
            check_finite(pq, iterations, "curvature")?;
            if pq <= 0.0 {
                return Err(Error::Breakdown {
                    iterations, reason: format!("non-positive curvature pᵀAp = {pq:.3e}")
                });
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            let rnorm = norm(&r);
            check_finite(rnorm, iterations, "residual")?;
            pre.apply(&r, &mut z);
            let rz_new = dot(&r, &z);
            report.history.push(rz_new.max(0.0).sqrt() / bnorm);
            if rnorm / bnorm <= opts.tol {
                rel = true_residual(op, b, &x, &mut r) / bnorm;
                if rel <= opts.tol || restarts >= 3 {
                    break 'outer;
                }
                restarts += 1;
                continue 'outer;
            }
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        rel = true_residual(op, b, &x, &mut r) / bnorm;
    }

    report.iterations = iterations;
    report.relative_residual = rel;
    report.converged = rel <= opts.tol;
    report.seconds = start.elapsed().as_secs_f64();
    Ok((x, report))
}

/// Right-preconditioned Bi-CGSTAB.
///
/// A vanishing `ρ` or `ω` triggers one restart with the current residual
/// as the new shadow vector; a second breakdown is reported as an error.
pub fn bicgstab<O, P>(
    op: &O,
    pre: &P,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: SolverOptions,
) -> Result<(Vec<f64>, SolveReport)>
where
    O: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    check_dims(op, b, x0)?;
    let start = Instant::now();
    let n = op.dim();
    let bnorm = norm(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut report = SolveReport::default();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        report.converged = true;
        report.seconds = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }

    let mut r = vec![0.0; n];
    let mut rel = true_residual(op, b, &x, &mut r) / bnorm;
    check_finite(rel, 0, "initial residual")?;
    let mut r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut restarted = false;
    let mut iterations = 0;
    let eps = f64::EPSILON;

    while rel > opts.tol && iterations < opts.maxit {
        iterations += 1;
        let rho_new = dot(&r_hat, &r);
        check_finite(rho_new, iterations, "rho")?;
        if rho_new.abs() <= eps * norm(&r_hat) * norm(&r) {
            if restarted {
                return Err(Error::Breakdown { iterations, reason: "rho breakdown".into() });
            }
            restarted = true;
            r_hat.copy_from_slice(&r);
            p.iter_mut().for_each(|e| *e = 0.0);
            v.iter_mut().for_each(|e| *e = 0.0);
            (rho, alpha, omega) = (1.0, 1.0, 1.0);
            iterations -= 1;
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        pre.apply(&p, &mut p_hat);
        op.apply(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        check_finite(rv, iterations, "r_hat·v")?;
        if rv == 0.0 {
            return Err(Error::Breakdown { iterations, reason: "r_hat·v vanished".into() });
        }
        alpha = rho / rv;
        // r now holds s = r − αv
        for i in 0..n {
            r[i] -= alpha * v[i];
        }
        if norm(&r) / bnorm <= opts.tol {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            rel = true_residual(op, b, &x, &mut r) / bnorm;
            if rel <= opts.tol {
                break;
            }
            continue;
        }
        pre.apply(&r, &mut s_hat);
        op.apply(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &r) / tt } else { 0.0 };
        check_finite(omega, iterations, "omega")?;
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] -= omega * t[i];
        }
        rel = norm(&r) / bnorm;
        check_finite(rel, iterations, "residual")?;
        if omega.abs() <= eps {
            if restarted {
                return Err(Error::Breakdown { iterations, reason: "omega breakdown".into() });
            }
            restarted = true;
            rel = true_residual(op, b, &x, &mut r) / bnorm;
            r_hat.copy_from_slice(&r);
            p.iter_mut().for_each(|e| *e = 0.0);
            v.iter_mut().for_each(|e| *e = 0.0);
            (rho, alpha, omega) = (1.0, 1.0, 1.0);
        }
    }

    rel = true_residual(op, b, &x, &mut r) / bnorm;
    report.iterations = iterations;
    report.relative_residual = rel;
    report.converged = rel <= opts.tol;
    report.seconds = start.elapsed().as_secs_f64();
    Ok((x, report))
}
