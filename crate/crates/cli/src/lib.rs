//! Experiment runner: resolves TOML experiment files, runs the sweeps and
//! writes a CSV table plus a JSON manifest.

pub mod experiments;
pub mod output;
pub mod spec;
pub mod validate;

pub use experiments::{run, RunOutput, Table};
pub use output::write_outputs;
pub use spec::{Experiment, ExperimentSpec, Overrides, Param, Point};
pub use validate::{validate, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation failed: {0}")]
    Simulation(qdent_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Core errors met while resolving a spec are configuration problems.
impl From<qdent_core::Error> for CliError {
    fn from(e: qdent_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
