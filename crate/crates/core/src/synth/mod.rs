//! Seeded synthetic panels with known parameters, and brute-force oracles.

pub mod dgp;
pub mod oracle;
pub mod rng;

use thiserror::Error;

pub use dgp::{generate, read_truth, write_truth, DGPConfig, GroundTruth, OutcomeModel};
pub use oracle::{oracle_grid_mle, oracle_shortest_paths, GridModel, GridResult, OraclePaths};
pub use rng::SeedRng;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid DGP config: {0}")]
    ConfigInvalid(String),
    #[error("instance too large for the oracle: {0}")]
    TooLarge(String),
    #[error("generated panel failed validation: {0}")]
    Panel(#[source] crate::netcore::NetError),
    #[error("measure computation failed: {0}")]
    Measures(#[source] crate::measures::MeasureError),
    #[error("truth file: {0}")]
    Truth(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
