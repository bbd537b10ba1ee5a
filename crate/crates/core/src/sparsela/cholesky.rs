use crate::error::{Error, Result};

use super::SparseMatrix;

/// Cholesky factor `A = L·Lᵀ` in banded storage.
///
/// Row `i` of `L` keeps columns `i − bw ..= i`, so factorization costs
/// `O(n·bw²)` and a solve `O(n·bw)`. For the bilinear stiffness matrix on an
/// `n × n` cell grid the bandwidth is `n`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    band: Vec<f64>,
}

impl BandCholesky {
    /// Factors the symmetric matrix `a`; only the lower triangle is read.
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Input("Cholesky needs a square matrix".into()));
        }
        let n = a.nrows();
        let bw = a.lower_bandwidth();
        let width = bw + 1;
        let mut band = vec![0.0; n * width];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    band[i * width + (j + bw - i)] = v;
                }
            }
        }
        for i in 0..n {
            let lo_i = i.saturating_sub(bw);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(bw));
                let mut s = band[i * width + (j + bw - i)];
                for k in lo..j {
                    s -= band[i * width + (k + bw - i)] * band[j * width + (k + bw - j)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotSpd { row: i, pivot: s });
                    }
                    band[i * width + bw] = s.sqrt();
                } else {
                    band[i * width + (j + bw - i)] = s / band[j * width + bw];
                }
            }
        }
        Ok(BandCholesky { n, bw, band })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Entry `L(i, j)` (zero outside the band or above the diagonal).
    pub fn lower_entry(&self, i: usize, j: usize) -> f64 {
        if j > i || i - j > self.bw {
            0.0
        } else {
            self.band[i * (self.bw + 1) + (j + self.bw - i)]
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Input(format!("rhs length {} for dimension {}", b.len(), self.n)));
        }
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// Forward then backward substitution, overwriting `x`.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let width = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.band[i * width..(i + 1) * width];
            let mut s = x[i];
            for k in lo..i {
                s -= row[k + bw - i] * x[k];
            }
            x[i] = s / row[bw];
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = x[i];
            for k in i + 1..=hi {
                s -= self.band[k * width + (i + bw - k)] * x[k];
            }
            x[i] = s / self.band[i * width + bw];
        }
    }
}
