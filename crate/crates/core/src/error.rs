use thiserror::Error;

/// Errors produced by region construction, data handling, LMI assembly and synthesis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// `[X0; U0]` does not have full row rank, so the consistency set is unbounded.
    #[error("data matrix [X0; U0] lacks full row rank (smallest singular value {sigma_min:.3e}, largest {sigma_max:.3e})")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },

    /// The data cannot be explained by the disturbance model.
    #[error("data inconsistent with the disturbance model: radius matrix has eigenvalue {min_eig:.3e} below tolerance {tol:.3e}")]
    InconsistentData { min_eig: f64, tol: f64 },

    #[error("region '{0}' has no rank-one factorization of beta; inner-approximate it with halfplanes and disks")]
    NoRankOneFactor(String),

    #[error("{0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Read a whole file, naming the path in the error.
pub(crate) fn read_text(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}
