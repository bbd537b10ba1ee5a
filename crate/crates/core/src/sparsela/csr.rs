use crate::error::{Error, Result};

use super::LinearOperator;

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Assembles from `(row, col, value)` triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::Input(format!("entry ({i},{j}) outside a {nrows}x{ncols} matrix")));
            }
            sorted.push((i, j, v));
        }
        sorted.sort_by_key(|t| (t.0, t.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for (i, j, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|t| t.2 != 0.0);

        let mut row_ptr = vec![0usize; nrows + 1];
        for &(i, _, _) in &merged {
            row_ptr[i + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx: merged.iter().map(|t| t.1).collect(),
            values: merged.iter().map(|t| t.2).collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { nrows: n, ncols: n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Input("ragged dense matrix".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &triplets)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                triplets.push((j, i, v));
            }
        }
        SparseMatrix::from_triplets(self.ncols, self.nrows, &triplets).expect("transposed indices are in range")
    }

    /// Largest entrywise difference `max |A − B|`; both must share a shape.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - other.get(i, j)).abs());
            }
            for (j, v) in other.row(i) {
                worst = worst.max((v - self.get(i, j)).abs());
            }
        }
        worst
    }

    /// Lower bandwidth `max(i − j)` over stored entries.
    pub fn lower_bandwidth(&self) -> usize {
        (0..self.nrows).flat_map(|i| self.row(i).map(move |(j, _)| i.saturating_sub(j))).max().unwrap_or(0)
    }

    /// `y = A·x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::Input(format!("vector of length {} against {} columns", x.len(), self.ncols)));
        }
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// `y = A·x` without dimension checks beyond debug asserts.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// `y += alpha·A·x`.
    pub fn matvec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi += alpha * acc;
        }
    }

    pub fn scaled(&self, alpha: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out.drop_zeros();
        out
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut row_ptr = vec![0; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.values[k] != 0.0 {
                    col_idx.push(self.col_idx[k]);
                    values.push(self.values[k]);
                }
            }
            row_ptr[i + 1] = values.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.nrows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }
}

/// A family of matrices `A_0, …, A_{K−1}` scattered onto their union
/// sparsity pattern, so that `Σ w_i A_i` costs one pass over the values.
#[derive(Debug, Clone)]
pub struct AffineMatrix {
    pattern: SparseMatrix,
    terms: Vec<Vec<f64>>,
}

impl AffineMatrix {
    pub fn new(terms: &[SparseMatrix]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::Input("affine matrix needs at least one term".into()))?;
        let (nrows, ncols) = (first.nrows, first.ncols);
        let mut triplets = Vec::new();
        for t in terms {
            if (t.nrows, t.ncols) != (nrows, ncols) {
                return Err(Error::Input("affine terms differ in shape".into()));
            }
            for i in 0..nrows {
                // unit placeholder so cancellation never drops a pattern slot
                triplets.extend(t.row(i).map(|(j, _)| (i, j, 1.0)));
            }
        }
        let mut pattern = SparseMatrix::from_triplets(nrows, ncols, &triplets)?;
        pattern.values.iter_mut().for_each(|v| *v = 0.0);
        let scattered = terms
            .iter()
            .map(|t| {
                let mut vals = vec![0.0; pattern.nnz()];
                for i in 0..nrows {
                    let base = pattern.row_ptr[i];
                    let cols = &pattern.col_idx[base..pattern.row_ptr[i + 1]];
                    for (j, v) in t.row(i) {
                        let k = cols.binary_search(&j).expect("pattern covers every term");
                        vals[base + k] = v;
                    }
                }
                vals
            })
            .collect();
        Ok(AffineMatrix { pattern, terms: scattered })
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// `Σ weights[i]·A_i` on the shared pattern (zeros are kept).
    pub fn combine(&self, weights: &[f64]) -> Result<SparseMatrix> {
        if weights.len() != self.terms.len() {
            return Err(Error::Input(format!("{} weights for {} terms", weights.len(), self.terms.len())));
        }
        let mut out = self.pattern.clone();
        for (w, vals) in weights.iter().zip(&self.terms) {
            if *w == 0.0 {
                continue;
            }
            for (o, v) in out.values.iter_mut().zip(vals) {
                *o += w * v;
            }
        }
        Ok(out)
    }
}
