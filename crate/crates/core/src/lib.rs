//! Indirect corporate-control networks and bilateral trade.
//!
//! - [`netcore`]: dyad panels, country registry, trade and control graphs
//! - [`measures`]: shortest control paths, communicability, `diff`
//! - [`econ`]: design matrices and the estimator suite
//! - [`synth`]: seeded synthetic panels and brute-force oracles
//! - [`cli`]: the `indirect-fdi` command-line front end

pub mod cli;
pub mod econ;
pub mod measures;
pub mod netcore;
pub mod synth;

use thiserror::Error;

/// Any error the crate can surface, with its CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Net(#[from] netcore::NetError),
    #[error(transparent)]
    Measure(#[from] measures::MeasureError),
    #[error(transparent)]
    Econ(#[from] econ::EconError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Input {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// 2 for bad input or arguments, 1 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Output { .. } => 1,
            Error::Synth(synth::SynthError::Io(_)) => 1,
            _ => 2,
        }
    }
}
