//! Adaptive ANOVA stochastic Galerkin driver.
//!
//! Round `k` solves the Galerkin system on the catalog spanned by the active
//! sets of orders `1..=k`, measures every active component by its relative
//! variance `γ`, keeps the order-`k` sets with `γ ≥ TOL` and activates the
//! order-`k+1` sets whose every order-`k` subset was kept.

use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{l2_norm, Grid2d, GridFunction};
use crate::galerkin::{component_variance, solve_sgm, total_statistics, GpcCoefficients, PhysicalSystem};
use crate::multiindex::{admissible_next, enumerate_anova_sets, AnovaSet, IndexCatalog};
use crate::randomfield::{kl_2d, FieldParams};
use crate::sparsela::{SolveReport, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AasgConfig {
    /// KL parameters; `field.n_modes` is the stochastic dimension `N`.
    pub field: FieldParams,
    /// Cells per side of the finite element grid.
    pub grid_cells: usize,
    /// gPC total degree `p`.
    pub degree: u32,
    /// Relative variance threshold `TOL`.
    pub tol: f64,
    pub solver_tol: f64,
    /// Iteration cap per solve; `None` picks one from the catalog size.
    pub maxit: Option<usize>,
    /// Highest ANOVA order ever activated.
    pub max_order: Option<usize>,
}

impl AasgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Input(format!("TOL must be positive, got {}", self.tol)));
        }
        if self.degree < 1 {
            return Err(Error::Input("gPC degree must be at least 1".into()));
        }
        if self.field.n_modes < 1 {
            return Err(Error::Input("need at least one random variable".into()));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::Input(format!("solver tolerance must be positive, got {}", self.solver_tol)));
        }
        if self.max_order == Some(0) {
            return Err(Error::Input("max_order must be at least 1".into()));
        }
        Ok(())
    }

    pub fn solver_options(&self, n_stoch: usize) -> SolverOptions {
        let mut opts = SolverOptions::for_blocks(self.solver_tol, n_stoch);
        if let Some(m) = self.maxit {
            opts.maxit = m;
        }
        opts
    }
}

/// One pass of the adaptive loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AasgRound {
    pub k: usize,
    /// Active order-`k` sets `𝔍_k`.
    pub active: Vec<AnovaSet>,
    /// Order-`k` sets kept by the threshold, `𝔍̃_k`.
    pub retained: Vec<AnovaSet>,
    pub catalog_size: usize,
    /// Relative variance of every active set of order `1..=k`.
    pub gamma: Vec<(AnovaSet, f64)>,
    pub report: SolveReport,
}

#[derive(Debug, Clone)]
pub struct AasgResult {
    pub rounds: Vec<AasgRound>,
    pub coefficients: GpcCoefficients,
    pub mean: GridFunction,
    pub variance: GridFunction,
}

impl AasgResult {
    /// Order of the last solved round.
    pub fn final_order(&self) -> usize {
        self.rounds.last().map_or(0, |r| r.k)
    }

    pub fn catalog_size(&self) -> usize {
        self.coefficients.catalog.len()
    }

    pub fn total_solve_seconds(&self) -> f64 {
        self.rounds.iter().map(|r| r.report.seconds).sum()
    }

    pub fn total_iterations(&self) -> usize {
        self.rounds.iter().map(|r| r.report.iterations).sum()
    }
}

/// `γ_𝕋 = ‖Var u_𝕋‖ / Σ_𝕊 ‖Var u_𝕊‖` over `sets`, in the given order.
pub fn relative_variances(coeffs: &GpcCoefficients, sets: &[AnovaSet], grid: &Grid2d) -> Result<Vec<(AnovaSet, f64)>> {
    let norms =
        sets.iter().map(|s| component_variance(coeffs, s).map(|v| l2_norm(grid, &v))).collect::<Result<Vec<f64>>>()?;
    let total: f64 = norms.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("every active component has zero variance".into()));
    }
    Ok(sets.iter().cloned().zip(norms.iter().map(|n| n / total)).collect())
}

/// Builds the field and physical system for `config`, then runs the loop.
pub fn run_aasg(config: &AasgConfig) -> Result<AasgResult> {
    config.validate()?;
    let grid = Grid2d::new(config.grid_cells)?;
    let field = kl_2d(config.field, grid)?;
    let system = PhysicalSystem::new(field)?;
    run_aasg_on(&system, config)
}

/// Runs the adaptive loop on a prepared system; `config.field` and
/// `config.grid_cells` must describe it.
pub fn run_aasg_on(system: &PhysicalSystem, config: &AasgConfig) -> Result<AasgResult> {
    config.validate()?;
    let dim = system.n_random();
    if dim != config.field.n_modes || system.grid.cells() != config.grid_cells {
        return Err(Error::Input("configuration does not match the prepared system".into()));
    }
    let p = config.degree as usize;
    let max_order = config.max_order.unwrap_or(usize::MAX);

    let mut active: Vec<Vec<AnovaSet>> = vec![enumerate_anova_sets(1, dim)?];
    let mut rounds = Vec::new();
    let mut warm: Option<GpcCoefficients> = None;
    let mut k = 1;
    loop {
        let started = Instant::now();
        let catalog = IndexCatalog::build(&active, config.degree, dim)?;
        let opts = config.solver_options(catalog.len());
        let (coeffs, report) = solve_sgm(system, &catalog, opts, warm.as_ref())
            .map_err(|e| Error::InRound { round: k, source: Box::new(e) })?;

        let all_active: Vec<AnovaSet> = active.iter().flatten().cloned().collect();
        let (gamma, retained) = match relative_variances(&coeffs, &all_active, &system.grid) {
            Ok(gamma) => {
                let retained: Vec<AnovaSet> =
                    gamma.iter().filter(|(s, g)| s.order() == k && *g >= config.tol).map(|(s, _)| s.clone()).collect();
                (gamma, retained)
            }
            Err(Error::Degenerate(msg)) => {
                info!("round {k}: {msg}; stopping with the mean-only solution");
                (Vec::new(), Vec::new())
            }
            Err(e) => return Err(e),
        };
        info!(
            "round {k}: |J| = {}, |J~| = {}, catalog {}, {} CG iterations, {:.3}s",
            active[k - 1].len(),
            retained.len(),
            catalog.len(),
            report.iterations,
            started.elapsed().as_secs_f64()
        );
        let next: Vec<AnovaSet> = admissible_next(&retained, dim).into_iter().filter(|s| s.order() <= p).collect();
        rounds.push(AasgRound {
            k,
            active: active[k - 1].clone(),
            retained,
            catalog_size: catalog.len(),
            gamma,
            report,
        });
        warm = Some(coeffs);
        k += 1;
        if k >= dim || k > max_order || next.is_empty() {
            break;
        }
        active.push(next);
    }

    let coefficients = warm.expect("at least one round is solved");
    let (mean, variance) = total_statistics(&coefficients);
    Ok(AasgResult { rounds, coefficients, mean, variance })
}

/// Relative lumped-mass errors `(E_err, V_err)` of approximate mean and
/// variance fields against reference ones.
pub fn compare_errors(grid: &Grid2d, approx: (&[f64], &[f64]), reference: (&[f64], &[f64])) -> Result<(f64, f64)> {
    let rel = |a: &[f64], r: &[f64], what: &str| -> Result<f64> {
        if a.len() != r.len() || a.len() != grid.n_phy() {
            return Err(Error::Input(format!(
                "{what} fields of length {} and {} on a grid with {} unknowns",
                a.len(),
                r.len(),
                grid.n_phy()
            )));
        }
        let denom = l2_norm(grid, r);
        if !(denom > 0.0) {
            return Err(Error::Degenerate(format!("reference {what} field is zero")));
        }
        let diff: Vec<f64> = a.iter().zip(r).map(|(x, y)| x - y).collect();
        Ok(l2_norm(grid, &diff) / denom)
    };
    Ok((rel(approx.0, reference.0, "mean")?, rel(approx.1, reference.1, "variance")?))
}
