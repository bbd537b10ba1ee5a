use crate::error::{Error, Result};
use crate::par;

use super::{BandCholesky, LinearOperator, Preconditioner, SparseMatrix};

/// Matrix-free `Σ_i G_i ⊗ A_i` acting on vectors laid out as `n_stoch`
/// consecutive blocks of length `n_phy`.
#[derive(Debug, Clone)]
pub struct KronSumOperator {
    stoch: Vec<SparseMatrix>,
    phys: Vec<SparseMatrix>,
    n_stoch: usize,
    n_phy: usize,
}

impl KronSumOperator {
    pub fn new(terms: Vec<(SparseMatrix, SparseMatrix)>) -> Result<Self> {
        let (g0, a0) = terms.first().ok_or_else(|| Error::Input("Kronecker sum needs at least one term".into()))?;
        let n_stoch = g0.nrows();
        let n_phy = a0.nrows();
        for (i, (g, a)) in terms.iter().enumerate() {
            if g.nrows() != n_stoch || g.ncols() != n_stoch {
                return Err(Error::Input(format!("stochastic factor {i} is not {n_stoch}x{n_stoch}")));
            }
            if a.nrows() != n_phy || a.ncols() != n_phy {
                return Err(Error::Input(format!("physical factor {i} is not {n_phy}x{n_phy}")));
            }
        }
        let (stoch, phys) = terms.into_iter().unzip();
        Ok(KronSumOperator { stoch, phys, n_stoch, n_phy })
    }

    pub fn n_stoch(&self) -> usize {
        self.n_stoch
    }

    pub fn n_phy(&self) -> usize {
        self.n_phy
    }

    pub fn n_terms(&self) -> usize {
        self.stoch.len()
    }

    pub fn term(&self, i: usize) -> (&SparseMatrix, &SparseMatrix) {
        (&self.stoch[i], &self.phys[i])
    }

    /// Checked application; see [`LinearOperator::apply`].
    pub fn kron_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_stoch * self.n_phy;
        if v.len() != n {
            return Err(Error::Input(format!("vector of length {} for operator of size {n}", v.len())));
        }
        let mut out = vec![0.0; n];
        self.apply(v, &mut out);
        Ok(out)
    }

    /// Output block `j` = `Σ_i A_i (Σ_k G_i(j,k) u_k)`.
    fn apply_block(&self, j: usize, v: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let n_phy = self.n_phy;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (g, a) in self.stoch.iter().zip(&self.phys) {
            let mut row = g.row(j);
            let Some((k0, g0)) = row.next() else { continue };
            match row.next() {
                None => a.matvec_add(g0, &v[k0 * n_phy..(k0 + 1) * n_phy], out),
                Some((k1, g1)) => {
                    let u0 = &v[k0 * n_phy..(k0 + 1) * n_phy];
                    let u1 = &v[k1 * n_phy..(k1 + 1) * n_phy];
                    for ((s, a0), a1) in scratch.iter_mut().zip(u0).zip(u1) {
                        *s = g0 * a0 + g1 * a1;
                    }
                    for (k, gk) in row {
                        let uk = &v[k * n_phy..(k + 1) * n_phy];
                        for (s, x) in scratch.iter_mut().zip(uk) {
                            *s += gk * x;
                        }
                    }
                    a.matvec_add(1.0, scratch, out);
                }
            }
        }
    }
}

impl LinearOperator for KronSumOperator {
    fn dim(&self) -> usize {
        self.n_stoch * self.n_phy
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        let n_phy = self.n_phy;
        par::for_each_chunk_mut(y, n_phy, |j, out| {
            let mut scratch = vec![0.0; n_phy];
            self.apply_block(j, x, out, &mut scratch);
        });
    }
}

/// Block-diagonal `I ⊗ A` preconditioner applied through one factorization
/// of `A`; with `A` the mean stiffness matrix this is the mean-based
/// preconditioner.
#[derive(Debug, Clone)]
pub struct BlockDiagonalPreconditioner<'a> {
    factor: &'a BandCholesky,
}

impl<'a> BlockDiagonalPreconditioner<'a> {
    pub fn new(factor: &'a BandCholesky) -> Self {
        BlockDiagonalPreconditioner { factor }
    }
}

impl Preconditioner for BlockDiagonalPreconditioner<'_> {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        par::for_each_chunk_mut(z, self.factor.dim(), |_, block| {
            self.factor.solve_in_place(block);
        });
    }
}
