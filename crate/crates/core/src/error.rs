use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is numerically singular (pivot {pivot:.3e} below {threshold:.3e})")]
    Singular { pivot: f64, threshold: f64 },

    #[error("rank deficiency at column {column} (residual norm {norm:.3e})")]
    RankDeficient { column: usize, norm: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("instance too large: {0}")]
    Capacity(String),
}
