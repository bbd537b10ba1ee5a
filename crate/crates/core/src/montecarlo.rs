//! Monte Carlo baseline.
//!
//! Sample `i` draws `ξ ∈ [−1, 1]^N` from its own ChaCha stream (stream id
//! `i` under the run seed), so a sample's value never depends on which
//! worker computed it. Samples are grouped in fixed chunks; each chunk is
//! accumulated sequentially and the chunk accumulators are merged in index
//! order, which makes the result bitwise independent of the thread count.

use std::time::Instant;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::GridFunction;
use crate::galerkin::PhysicalSystem;
use crate::par;
use crate::sparsela::{cg, AffineMatrix, SolveReport, SolverOptions};

/// Samples per work unit; fixed so the merge tree does not depend on the pool.
const CHUNK: u64 = 32;

/// Streaming mean and sum of squared deviations, field by field.
#[derive(Debug, Clone, PartialEq)]
pub struct McAccumulator {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl McAccumulator {
    pub fn new(len: usize) -> Self {
        McAccumulator { count: 0, mean: vec![0.0; len], m2: vec![0.0; len] }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Welford update with one sample.
    pub fn push(&mut self, sample: &[f64]) {
        assert_eq!(sample.len(), self.mean.len(), "sample length");
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(sample) {
            let delta = x - *m;
            *m += delta / n;
            *s += delta * (x - *m);
        }
    }

    /// Chan's pairwise combination of two disjoint sample sets.
    pub fn merge(&mut self, other: &McAccumulator) {
        assert_eq!(other.mean.len(), self.mean.len(), "field length");
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.count += other.count;
    }

    /// Unbiased variance `M₂ / (M − 1)`; `None` for fewer than two samples.
    pub fn variance(&self) -> Option<Vec<f64>> {
        (self.count >= 2).then(|| {
            let d = (self.count - 1) as f64;
            self.m2.iter().map(|s| s / d).collect()
        })
    }
}

/// The parameter point of sample `index` under `seed`.
pub fn sample_point(seed: u64, index: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Deterministic solves at given parameter points, reusing the per-mode
/// stiffness matrices and the mean factorization.
#[derive(Debug, Clone)]
pub struct SampleSolver<'a> {
    system: &'a PhysicalSystem,
    affine: AffineMatrix,
    opts: SolverOptions,
}

impl<'a> SampleSolver<'a> {
    pub fn new(system: &'a PhysicalSystem, opts: SolverOptions) -> Result<Self> {
        Ok(SampleSolver { system, affine: AffineMatrix::new(&system.stiffness)?, opts })
    }

    /// FEM solution for `A(ξ) = A_0 + Σ ξ_m A_m`.
    pub fn solve(&self, xi: &[f64]) -> Result<(GridFunction, SolveReport)> {
        let dim = self.system.n_random();
        if xi.len() != dim {
            return Err(Error::Input(format!("sample has {} components, expected {dim}", xi.len())));
        }
        if let Some(bad) = xi.iter().find(|x| !(x.abs() <= 1.0)) {
            return Err(Error::Domain(format!("sample component {bad} outside [-1, 1]")));
        }
        let mut weights = Vec::with_capacity(dim + 1);
        weights.push(1.0);
        weights.extend_from_slice(xi);
        let a = self.affine.combine(&weights)?;
        let (u, report) = cg(&a, &self.system.mean_factor, &self.system.load, None, self.opts)?;
        if !report.converged {
            return Err(Error::NotConverged { report });
        }
        Ok((GridFunction(u), report))
    }
}

/// One-off sample solve; prefer [`SampleSolver`] for repeated use.
pub fn sample_solve(system: &PhysicalSystem, xi: &[f64], opts: SolverOptions) -> Result<GridFunction> {
    if system.field.positivity_report() <= 0.0 {
        let field = &system.field;
        let min = (0..field.a0.len()).filter_map(|k| field.field_eval(xi, k).ok()).fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            warn!("coefficient reaches {min:.3e} at this sample");
        }
    }
    SampleSolver::new(system, opts)?.solve(xi).map(|(u, _)| u)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub samples: u64,
    pub seed: u64,
    /// Wall time of the whole run.
    pub seconds_total: f64,
    /// Summed CG time over samples.
    pub seconds_solve: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone)]
pub struct McResult {
    pub mean: GridFunction,
    pub variance: GridFunction,
    pub report: McReport,
}

struct ChunkOutcome {
    acc: McAccumulator,
    seconds: f64,
    iterations: usize,
}

/// Mean and unbiased variance of the solution over `samples` draws.
pub fn run_mc(system: &PhysicalSystem, samples: u64, seed: u64, opts: SolverOptions) -> Result<McResult> {
    if samples < 2 {
        return Err(Error::Input(format!("need at least 2 samples, got {samples}")));
    }
    let started = Instant::now();
    let solver = SampleSolver::new(system, opts)?;
    let dim = system.n_random();
    let n_phy = system.n_phy();
    let n_chunks = samples.div_ceil(CHUNK);
    let chunks = par::map_range(n_chunks as usize, |c| -> Result<ChunkOutcome> {
        let mut out = ChunkOutcome { acc: McAccumulator::new(n_phy), seconds: 0.0, iterations: 0 };
        let first = c as u64 * CHUNK;
        for index in first..(first + CHUNK).min(samples) {
            let xi = sample_point(seed, index, dim);
            let (u, report) =
                solver.solve(&xi).map_err(|e| Error::InSample { index, xi: xi.clone(), source: Box::new(e) })?;
            out.acc.push(&u);
            out.seconds += report.seconds;
            out.iterations += report.iterations;
        }
        Ok(out)
    });

    let mut acc = McAccumulator::new(n_phy);
    let mut seconds_solve = 0.0;
    let mut iterations = 0usize;
    for chunk in chunks {
        let chunk = chunk?;
        acc.merge(&chunk.acc);
        seconds_solve += chunk.seconds;
        iterations += chunk.iterations;
    }
    let variance = acc.variance().expect("at least two samples");
    Ok(McResult {
        mean: GridFunction(acc.mean),
        variance: GridFunction(variance),
        report: McReport {
            samples,
            seed,
            seconds_total: started.elapsed().as_secs_f64(),
            seconds_solve,
            mean_iterations: iterations as f64 / samples as f64,
        },
    })
}
