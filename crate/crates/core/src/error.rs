use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("amplitude count overflows u64 for atoms={atoms}, excitations={excitations}, modes={modes}")]
    CountOverflow {
        atoms: u32,
        excitations: u32,
        modes: u32,
    },

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("state {0} is not in the active sector")]
    StateOutsideSector(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite amplitude at step {step} (t = {time} L/c)")]
    NonFinite { step: usize, time: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e}, frobenius norm {frobenius:e})")]
    EigenNoConvergence {
        sweeps: usize,
        off_norm: f64,
        frobenius: f64,
    },

    #[error("series is not uniformly sampled near t = {0}")]
    NonUniformSampling(f64),

    #[error("configuration errors:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParams(_) | Error::InvalidSector(_) => 2,
            Error::Io { .. } => 3,
            Error::NonFinite { .. } => 4,
            Error::EigenNoConvergence { .. } => 5,
            Error::CountOverflow { .. } => 6,
            Error::StateOutsideSector(_) | Error::NonUniformSampling(_) => 7,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
