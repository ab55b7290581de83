use std::path::PathBuf;

use crate::config::ConfigErrors;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const INPUT: u8 = 1;
    pub const BLOCKING: u8 = 2;
    pub const NUMERICAL: u8 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{path}:\n{errors}")]
    Config { path: PathBuf, errors: ConfigErrors },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] ionwire_core::Error),

    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use ionwire_core::Error as E;
        match self {
            CliError::Core(E::UnstableCoupling { .. } | E::TruncationLeak { .. } | E::SolverTolerance { .. })
            | CliError::Numerical(_) => exit::NUMERICAL,
            _ => exit::INPUT,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
