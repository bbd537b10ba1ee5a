use std::path::Path;

use aasg_core::adaptive::AasgConfig;
use aasg_core::randomfield::FieldParams;
use aasg_core::sparsela::SolverOptions;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Catalog sizes above this need an explicit `max_catalog`.
pub const DEFAULT_MAX_CATALOG: u64 = 20_000;

/// Experiment description; one TOML file per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    pub field: FieldSection,
    #[serde(default)]
    pub stochastic: Option<StochasticSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub mc: Option<McSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Cells per side; the grid has `n + 1` nodes per side.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    /// Correlation length.
    pub c: f64,
    pub sigma: f64,
    /// Mean coefficient.
    pub a0: f64,
    /// Number of KL modes (random variables).
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticSection {
    pub p: u32,
    /// Relative variance threshold; required by `aasg` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_catalog: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_solver_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxit: Option<usize>,
}

fn default_solver_tol() -> f64 {
    1e-8
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { tol: default_solver_tol(), maxit: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[serde(default)]
    pub threads: usize,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.grid.n < 2 {
            return bad(format!("grid.n must be at least 2, got {}", self.grid.n));
        }
        if !(self.field.c > 0.0) || !self.field.c.is_finite() {
            return bad(format!("field.c must be positive, got {}", self.field.c));
        }
        if !(self.field.sigma >= 0.0) || !self.field.sigma.is_finite() {
            return bad(format!("field.sigma must be non-negative, got {}", self.field.sigma));
        }
        if self.field.n < 1 {
            return bad("field.N must be at least 1".into());
        }
        if !(self.solver.tol > 0.0) {
            return bad(format!("solver.tol must be positive, got {}", self.solver.tol));
        }
        if let Some(s) = &self.stochastic {
            if s.p < 1 {
                return bad("stochastic.p must be at least 1".into());
            }
            if let Some(t) = s.tol {
                if !(t > 0.0) {
                    return bad(format!("stochastic.tol must be positive, got {t}"));
                }
            }
        }
        if let Some(mc) = &self.mc {
            if mc.samples < 2 {
                return bad(format!("mc.samples must be at least 2, got {}", mc.samples));
            }
        }
        Ok(())
    }

    pub fn field_params(&self) -> FieldParams {
        FieldParams { corr_len: self.field.c, sigma: self.field.sigma, mean: self.field.a0, n_modes: self.field.n }
    }

    pub fn stochastic(&self) -> Result<&StochasticSection, CliError> {
        self.stochastic.as_ref().ok_or_else(|| CliError::Config("missing section `stochastic`".into()))
    }

    pub fn mc(&self) -> Result<&McSection, CliError> {
        self.mc.as_ref().ok_or_else(|| CliError::Config("missing section `mc`".into()))
    }

    pub fn aasg_config(&self) -> Result<AasgConfig, CliError> {
        let s = self.stochastic()?;
        let tol = s.tol.ok_or_else(|| CliError::Config("missing field `tol` in section `stochastic`".into()))?;
        Ok(AasgConfig {
            field: self.field_params(),
            grid_cells: self.grid.n,
            degree: s.p,
            tol,
            solver_tol: self.solver.tol,
            maxit: self.solver.maxit,
            max_order: s.max_order,
        })
    }

    pub fn solver_options(&self, n_stoch: usize) -> SolverOptions {
        let mut opts = SolverOptions::for_blocks(self.solver.tol, n_stoch);
        if let Some(m) = self.solver.maxit {
            opts.maxit = m;
        }
        opts
    }
}
