//! Bilinear (Q1) finite elements on a uniform grid of the unit square with
//! homogeneous Dirichlet boundary conditions.
//!
//! Node `(i1, i2)` sits at `(i1·h, i2·h)`. Interior unknowns are numbered
//! row-major: `s = (i2 − 1)·(n − 1) + (i1 − 1)` for `1 ≤ i1, i2 ≤ n − 1`,
//! so `x1` varies fastest. Coefficients are supplied on all `(n + 1)²` nodes
//! in the same row-major layout including the boundary.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparsela::SparseMatrix;

/// Uniform grid with `n` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid2d {
    n: usize,
}

impl Grid2d {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Input(format!("grid needs at least 2 cells per axis, got {n}")));
        }
        Ok(Grid2d { n })
    }

    /// Cells per axis.
    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Number of interior unknowns `(n − 1)²`.
    pub fn n_phy(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    /// Number of nodes including the boundary, `(n + 1)²`.
    pub fn n_nodes(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn node_coords(&self, i1: usize, i2: usize) -> (f64, f64) {
        (i1 as f64 * self.h(), i2 as f64 * self.h())
    }

    /// Coordinates of interior unknown `s`.
    pub fn interior_coords(&self, s: usize) -> (f64, f64) {
        let m = self.n - 1;
        self.node_coords(s % m + 1, s / m + 1)
    }

    fn interior_slot(&self, i1: usize, i2: usize) -> Option<usize> {
        let n = self.n;
        if i1 == 0 || i2 == 0 || i1 == n || i2 == n {
            None
        } else {
            Some((i2 - 1) * (n - 1) + (i1 - 1))
        }
    }

    /// Samples `f` on all nodes (boundary included).
    pub fn sample_all_nodes<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_nodes());
        for i2 in 0..=self.n {
            for i1 in 0..=self.n {
                let (x1, x2) = self.node_coords(i1, i2);
                out.push(f(x1, x2));
            }
        }
        out
    }

    /// Restricts an all-node array to interior unknowns.
    pub fn interior_of(&self, all: &[f64]) -> GridFunction {
        let m = self.n - 1;
        let mut out = Vec::with_capacity(self.n_phy());
        for i2 in 1..=m {
            for i1 in 1..=m {
                out.push(all[i2 * (self.n + 1) + i1]);
            }
        }
        GridFunction(out)
    }
}

/// Values at the interior nodes of a [`Grid2d`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridFunction(pub Vec<f64>);

impl GridFunction {
    pub fn zeros(len: usize) -> Self {
        GridFunction(vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for GridFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for GridFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for GridFunction {
    fn from(v: Vec<f64>) -> Self {
        GridFunction(v)
    }
}

/// Stiffness of the unit-coefficient Q1 element, local order
/// (0,0), (1,0), (1,1), (0,1). Independent of `h` in two dimensions.
const Q1_STIFFNESS: [[f64; 4]; 4] = [
    [4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0],
    [-1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0],
    [-2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0],
    [-1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0],
];

fn element_nodes(i1: usize, i2: usize) -> [(usize, usize); 4] {
    [(i1, i2), (i1 + 1, i2), (i1 + 1, i2 + 1), (i1, i2 + 1)]
}

/// Stiffness matrix of `−∇·(a ∇·)` with `a` taken constant on each element
/// (mean of its four corner values). Dirichlet rows and columns removed.
pub fn assemble_stiffness(grid: &Grid2d, coeff: &[f64]) -> Result<SparseMatrix> {
    if coeff.len() != grid.n_nodes() {
        return Err(Error::Input(format!("coefficient has {} values, grid has {} nodes", coeff.len(), grid.n_nodes())));
    }
    let n = grid.n;
    let stride = n + 1;
    let mut triplets = Vec::with_capacity(16 * n * n);
    for e2 in 0..n {
        for e1 in 0..n {
            let nodes = element_nodes(e1, e2);
            let a_elem = nodes.iter().map(|&(i, j)| coeff[j * stride + i]).sum::<f64>() / 4.0;
            if a_elem == 0.0 {
                continue;
            }
            let slots = nodes.map(|(i, j)| grid.interior_slot(i, j));
            for (a, sa) in slots.iter().enumerate() {
                let Some(sa) = *sa else { continue };
                for (b, sb) in slots.iter().enumerate() {
                    let Some(sb) = *sb else { continue };
                    triplets.push((sa, sb, a_elem * Q1_STIFFNESS[a][b]));
                }
            }
        }
    }
    SparseMatrix::from_triplets(grid.n_phy(), grid.n_phy(), &triplets)
}

/// Consistent load vector `⟨f, v_s⟩` using 2×2 Gauss points per element.
pub fn assemble_load<F: Fn(f64, f64) -> f64>(grid: &Grid2d, f: F) -> Vec<f64> {
    let n = grid.n;
    let h = grid.h();
    let g = 0.5 / 3f64.sqrt();
    let pts = [0.5 - g, 0.5 + g];
    let mut load = vec![0.0; grid.n_phy()];
    for e2 in 0..n {
        for e1 in 0..n {
            let nodes = element_nodes(e1, e2);
            for &r in &pts {
                for &t in &pts {
                    let fx = f((e1 as f64 + r) * h, (e2 as f64 + t) * h);
                    let w = 0.25 * h * h;
                    let shape = [(1.0 - r) * (1.0 - t), r * (1.0 - t), r * t, (1.0 - r) * t];
                    for (k, &(i, j)) in nodes.iter().enumerate() {
                        if let Some(s) = grid.interior_slot(i, j) {
                            load[s] += w * fx * shape[k];
                        }
                    }
                }
            }
        }
    }
    load
}

/// Lumped-mass norm `√(h² Σ v_s²)`.
pub fn l2_norm(grid: &Grid2d, v: &[f64]) -> f64 {
    let h = grid.h();
    (h * h * v.iter().map(|x| x * x).sum::<f64>()).sqrt()
}
