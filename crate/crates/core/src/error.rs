use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("witness Schmidt rank {rank} is below r = {r}")]
    InvalidWitness { rank: usize, r: usize },

    #[error("expected two subsystems, got {0}")]
    NotBipartite(usize),

    #[error("need at least {required} subsystems, got {got}")]
    TooFewSubsystems { required: usize, got: usize },

    #[error("{0} subsystems is too many for exhaustive bipartition enumeration")]
    TooManySubsystems(usize),

    #[error("protocol: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
