use thiserror::Error;

/// Failures of a CLI command, each mapped to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("catalog size C(N+p, N) = {size} exceeds the budget of {budget} (raise stochastic.max_catalog)")]
    Budget { size: u128, budget: u64 },

    #[error("inputs do not match: {0}")]
    Mismatch(String),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Budget { .. } => 4,
            CliError::Mismatch(_) => 5,
        }
    }
}

impl From<aasg_core::Error> for CliError {
    fn from(e: aasg_core::Error) -> Self {
        use aasg_core::Error as E;
        match e {
            E::NotConverged { .. }
            | E::Breakdown { .. }
            | E::NotSpd { .. }
            | E::InRound { .. }
            | E::InSample { .. } => CliError::Solver(e.to_string()),
            E::Io(_) | E::Json(_) | E::Internal(_) => CliError::Io(e.to_string()),
            E::Input(_) | E::Domain(_) | E::Degenerate(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
