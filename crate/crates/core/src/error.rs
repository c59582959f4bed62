//! Error type shared across the library.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("model is not stable: spectral radius {rho}")]
    UnstableModel { rho: f64 },

    #[error("stationary covariance iteration did not converge within {max_doublings} doublings")]
    NoConvergence { max_doublings: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("gamma is singular or ill-conditioned (condition number {cond:.3e})")]
    SingularGamma { cond: f64 },

    #[error("recovered noise covariance is not positive definite (min eigenvalue {min_eig:.3e})")]
    NonPsdResidual { min_eig: f64 },

    #[error("covariance matrix is not symmetric (max asymmetry {asym:.3e})")]
    NotSymmetric { asym: f64 },

    #[error("covariance matrix is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("invalid rho: {0} (must lie in [0, 1) and keep every model stable)")]
    InvalidRho(f64),

    #[error("invalid model construction: {0}")]
    InvalidConstruction(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("trajectory too short: {0}")]
    TooShort(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid cluster count: {0}")]
    InvalidK(String),

    #[error("threshold grid is empty")]
    EmptyGrid,

    #[error("too many clusters for brute-force matching: {0} (limit 10)")]
    TooManyClusters(usize),

    #[error("too many models for brute-force matching: {0} (limit 10)")]
    TooManyModels(usize),

    #[error("normal matrix is singular (min eigenvalue {min_eig:.3e}); pass a positive ridge to proceed")]
    SingularNormalMatrix { min_eig: f64 },

    #[error("noise covariance is singular or near-singular (min eigenvalue {min_eig:.3e})")]
    SingularW { min_eig: f64 },

    #[error("permutation is not a bijection on the model indices")]
    InvalidPermutation,

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("missing subset: {0}")]
    MissingSubset(String),

    #[error("ragged csv: {0}")]
    RaggedCsv(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
