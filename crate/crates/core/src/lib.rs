//! Adaptive ANOVA stochastic Galerkin (AASG) solver for two-dimensional
//! diffusion problems whose coefficient depends affinely on many uniform
//! random variables.
//!
//! The crate is organised bottom-up:
//!
//! * [`polyquad`]: orthonormal Legendre polynomials and Gauss rules.
//! * [`multiindex`]: ANOVA sets, component multi-index sets and catalogs.
//! * [`randomfield`]: Karhunen–Loève expansion of a separable exponential field.
//! * [`fem`]: bilinear finite elements on the unit square.
//! * [`sparsela`]: CSR matrices, Kronecker-sum operators, CG / Bi-CGSTAB and
//!   a banded Cholesky factorization.
//! * [`galerkin`]: the stochastic Galerkin system and its statistics.
//! * [`adaptive`]: the adaptive ANOVA driver.
//! * [`montecarlo`]: the sampling baseline.
//! * [`io`]: CSV / JSON persistence of fields, catalogs and coefficients.
//!
//! With the default `parallel` feature the data-parallel inner loops
//! (Kronecker-sum application, block preconditioning, Monte Carlo samples)
//! run on rayon. Building with `--no-default-features` gives the sequential
//! code path with bitwise-identical results.

pub mod adaptive;
pub mod error;
pub mod fem;
pub mod galerkin;
pub mod io;
pub mod montecarlo;
pub mod multiindex;
pub mod par;
pub mod polyquad;
pub mod randomfield;
pub mod sparsela;

pub use error::{Error, Result};
