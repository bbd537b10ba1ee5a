//! Sparse linear algebra: CSR storage, the matrix-free Kronecker-sum
//! operator of the Galerkin system, preconditioned CG / Bi-CGSTAB and a
//! banded Cholesky factorization used by the mean-based preconditioner.

mod cholesky;
mod csr;
mod kron;
mod krylov;

pub use cholesky::BandCholesky;
pub use csr::{AffineMatrix, SparseMatrix};
pub use kron::{BlockDiagonalPreconditioner, KronSumOperator};
pub use krylov::{bicgstab, cg, SolveReport, SolverOptions};

/// A square linear map `y = Op·x`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Approximate inverse `z = M⁻¹ r`.
pub trait Preconditioner: Sync {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Diagonal scaling by `1 / A(i,i)`.
#[derive(Debug, Clone)]
pub struct JacobiPreconditioner {
    inv_diag: Vec<f64>,
}

impl JacobiPreconditioner {
    pub fn new(a: &SparseMatrix) -> crate::Result<Self> {
        let inv_diag = a
            .diagonal()
            .into_iter()
            .enumerate()
            .map(
                |(i, d)| {
                    if d == 0.0 {
                        Err(crate::Error::Input(format!("zero diagonal at row {i}")))
                    } else {
                        Ok(1.0 / d)
                    }
                },
            )
            .collect::<crate::Result<_>>()?;
        Ok(JacobiPreconditioner { inv_diag })
    }
}

impl Preconditioner for JacobiPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * d;
        }
    }
}

impl Preconditioner for BandCholesky {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.solve_in_place(z);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
