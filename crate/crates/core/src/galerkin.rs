//! Stochastic Galerkin system for the KL-affine diffusion problem.
//!
//! The coefficient `a(x, ξ) = a₀(x) + Σ_m a_m(x) ξ_m` gives the operator
//! `Σ_{m=0}^{N} G_m ⊗ A_m` with `A_m` the stiffness matrix of `a_m`,
//! `G_0 = I` and `G_m(j, k) = ⟨ξ_m Φ_j Φ_k⟩`. Under the orthonormal
//! Legendre basis `G_m` couples only indices that differ by one in
//! dimension `m`, with value `b_{max(i_m, k_m)}`.

use log::warn;

use crate::error::{Error, Result};
use crate::fem::{self, Grid2d, GridFunction};
use crate::multiindex::{AnovaSet, IndexCatalog};
use crate::par;
use crate::polyquad::{beta_unchecked, legendre_values_unchecked};
use crate::randomfield::KlField;
use crate::sparsela::{
    cg, BandCholesky, BlockDiagonalPreconditioner, KronSumOperator, SolveReport, SolverOptions, SparseMatrix,
};

/// Physical-space data shared by every stochastic solve on one field:
/// the per-mode stiffness matrices, the load vector and the factorized
/// mean stiffness matrix.
#[derive(Debug, Clone)]
pub struct PhysicalSystem {
    pub grid: Grid2d,
    pub field: KlField,
    /// `A_0` (mean coefficient) followed by `A_1, …, A_N`.
    pub stiffness: Vec<SparseMatrix>,
    pub load: Vec<f64>,
    pub mean_factor: BandCholesky,
}

impl PhysicalSystem {
    /// Assembles the system for source `f ≡ 1`.
    pub fn new(field: KlField) -> Result<Self> {
        Self::with_source(field, |_, _| 1.0)
    }

    pub fn with_source<F: Fn(f64, f64) -> f64>(field: KlField, source: F) -> Result<Self> {
        let grid = field.grid;
        let positivity = field.positivity_report();
        if positivity <= 0.0 {
            warn!("diffusion coefficient may lose positivity (lower bound {positivity:.3e})");
        }
        let mut coeffs: Vec<&[f64]> = vec![&field.a0];
        coeffs.extend(field.modes.iter().map(Vec::as_slice));
        let stiffness = par::map_range(coeffs.len(), |m| fem::assemble_stiffness(&grid, coeffs[m]))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let load = fem::assemble_load(&grid, source);
        let mean_factor = BandCholesky::factor(&stiffness[0])?;
        Ok(PhysicalSystem { grid, field, stiffness, load, mean_factor })
    }

    pub fn n_phy(&self) -> usize {
        self.grid.n_phy()
    }

    /// Number of random variables `N`.
    pub fn n_random(&self) -> usize {
        self.stiffness.len() - 1
    }
}

/// `G_m` over `catalog`; `m = 0` is the mean term (identity), `1..=N` the
/// random variables.
pub fn assemble_g(catalog: &IndexCatalog, m: usize) -> Result<SparseMatrix> {
    let n = catalog.len();
    if m == 0 {
        return Ok(SparseMatrix::identity(n));
    }
    if m > catalog.dim() {
        return Err(Error::Input(format!("dimension label {m} exceeds N = {}", catalog.dim())));
    }
    let mut triplets = Vec::new();
    for (j, alpha) in catalog.entries().iter().enumerate() {
        let d = alpha.degrees()[m - 1];
        if d == 0 {
            continue;
        }
        let mut lower = alpha.degrees().to_vec();
        lower[m - 1] -= 1;
        if let Some(k) = catalog.position(&crate::multiindex::MultiIndex::new(lower)) {
            let b = beta_unchecked(d as usize);
            triplets.push((j, k, b));
            triplets.push((k, j, b));
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// `h ⊗ f` with `h = (1, 0, …, 0)`: the load sits in block 0 only.
pub fn assemble_rhs(catalog: &IndexCatalog, load: &[f64]) -> Vec<f64> {
    let mut rhs = vec![0.0; catalog.len() * load.len()];
    rhs[..load.len()].copy_from_slice(load);
    rhs
}

/// The matrix-free Galerkin operator `Σ_m G_m ⊗ A_m` for `catalog`.
pub fn galerkin_operator(system: &PhysicalSystem, catalog: &IndexCatalog) -> Result<KronSumOperator> {
    if catalog.dim() != system.n_random() {
        return Err(Error::Input(format!(
            "catalog over {} variables, field has {} modes",
            catalog.dim(),
            system.n_random()
        )));
    }
    let gs =
        par::map_range(system.stiffness.len(), |m| assemble_g(catalog, m)).into_iter().collect::<Result<Vec<_>>>()?;
    let terms = gs.into_iter().zip(system.stiffness.iter().cloned()).filter(|(g, _)| g.nnz() > 0).collect();
    KronSumOperator::new(terms)
}

/// gPC coefficient fields `u_j(x)`, one block of `n_phy` values per catalog
/// entry; block 0 is the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct GpcCoefficients {
    pub catalog: IndexCatalog,
    pub n_phy: usize,
    pub values: Vec<f64>,
}

impl GpcCoefficients {
    pub fn new(catalog: IndexCatalog, n_phy: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != catalog.len() * n_phy {
            return Err(Error::Input(format!("{} values for {} blocks of {n_phy}", values.len(), catalog.len())));
        }
        Ok(GpcCoefficients { catalog, n_phy, values })
    }

    pub fn n_blocks(&self) -> usize {
        self.catalog.len()
    }

    pub fn block(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_phy..(j + 1) * self.n_phy]
    }

    /// Coefficients re-laid onto `catalog`: shared multi-indices keep their
    /// values, new ones start at zero.
    pub fn injected_into(&self, catalog: &IndexCatalog) -> Vec<f64> {
        let mut out = vec![0.0; catalog.len() * self.n_phy];
        for (j, idx) in self.catalog.entries().iter().enumerate() {
            if let Some(k) = catalog.position(idx) {
                out[k * self.n_phy..(k + 1) * self.n_phy].copy_from_slice(self.block(j));
            }
        }
        out
    }
}

/// Solves the Galerkin system on `catalog` by CG with the mean-based
/// preconditioner, optionally warm-started from earlier coefficients.
pub fn solve_sgm(
    system: &PhysicalSystem,
    catalog: &IndexCatalog,
    opts: SolverOptions,
    warm: Option<&GpcCoefficients>,
) -> Result<(GpcCoefficients, SolveReport)> {
    let op = galerkin_operator(system, catalog)?;
    let rhs = assemble_rhs(catalog, &system.load);
    let x0 = warm.map(|w| w.injected_into(catalog));
    let pre = BlockDiagonalPreconditioner::new(&system.mean_factor);
    let (x, report) = cg(&op, &pre, &rhs, x0.as_deref(), opts)?;
    if !report.converged {
        return Err(Error::NotConverged { report });
    }
    Ok((GpcCoefficients::new(catalog.clone(), system.n_phy(), x)?, report))
}

/// Nodewise `Σ_{i ∈ 𝔐_𝕋^p} u_i(x)²` for a non-empty set present in the catalog.
pub fn component_variance(coeffs: &GpcCoefficients, set: &AnovaSet) -> Result<GridFunction> {
    if set.is_empty() {
        return Err(Error::Input("the empty set carries the mean, not a variance".into()));
    }
    let slots = coeffs.catalog.slots_of(set).ok_or_else(|| Error::Input(format!("set {set} is not in the catalog")))?;
    let mut var = vec![0.0; coeffs.n_phy];
    for j in slots {
        for (v, u) in var.iter_mut().zip(coeffs.block(j)) {
            *v += u * u;
        }
    }
    Ok(GridFunction(var))
}

/// Mean field (block 0) and variance field `Σ_{j≥1} u_j²`.
pub fn total_statistics(coeffs: &GpcCoefficients) -> (GridFunction, GridFunction) {
    let mean = coeffs.block(0).to_vec();
    let mut var = vec![0.0; coeffs.n_phy];
    for j in 1..coeffs.n_blocks() {
        for (v, u) in var.iter_mut().zip(coeffs.block(j)) {
            *v += u * u;
        }
    }
    (GridFunction(mean), GridFunction(var))
}

/// Evaluates the gPC surrogate `Σ_j u_j Φ_j(ξ)` at one parameter point.
pub fn surrogate_eval(coeffs: &GpcCoefficients, xi: &[f64]) -> Result<GridFunction> {
    let dim = coeffs.catalog.dim();
    if xi.len() != dim {
        return Err(Error::Input(format!("sample has {} components, expected {dim}", xi.len())));
    }
    if let Some(bad) = xi.iter().find(|x| !(x.abs() <= 1.0)) {
        return Err(Error::Domain(format!("sample component {bad} outside [-1, 1]")));
    }
    let max_deg = coeffs.catalog.max_degree_per_dim() as usize;
    let table: Vec<Vec<f64>> = xi.iter().map(|&x| legendre_values_unchecked(max_deg, x)).collect();
    let mut out = vec![0.0; coeffs.n_phy];
    for (j, idx) in coeffs.catalog.entries().iter().enumerate() {
        let phi: f64 =
            idx.degrees().iter().enumerate().filter(|(_, &d)| d != 0).map(|(t, &d)| table[t][d as usize]).product();
        if phi != 0.0 {
            for (o, u) in out.iter_mut().zip(coeffs.block(j)) {
                *o += phi * u;
            }
        }
    }
    Ok(GridFunction(out))
}
