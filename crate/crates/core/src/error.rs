use thiserror::Error;

/// Everything that can go wrong while building, propagating or analyzing a run.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("resolution too coarse: {0}")]
    Resolution(String),

    #[error("eigensolver did not converge for state {state}: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence {
        state: usize,
        residual: f64,
        iterations: usize,
    },

    #[error("non-finite amplitude at step {step}")]
    NotFinite { step: usize },

    #[error("norm dropped to {norm:.4} at step {step}; enlarge the grid or the absorber margin")]
    NormLoss { step: usize, norm: f64 },

    #[error("norm drift {drift:.3e} exceeds tolerance; operator ordering failed")]
    NormDrift { drift: f64 },

    #[error("support error: {0}")]
    Support(String),

    #[error("q = {q} lies outside the dipole support [{lo}, {hi}]")]
    Extrapolation { q: f64, lo: f64, hi: f64 },

    #[error("ill-conditioned fit (condition number {condition:.3e}); rescale or widen the sampling")]
    IllConditioned { condition: f64 },

    #[error("fitted f(q) vanishes near q = {location:.6} inside the flow domain")]
    SingularFlow { location: f64 },

    #[error("flow map domain error: {0}")]
    Domain(String),

    #[error("sweep failed at q = {q}: {source}")]
    Sweep {
        q: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("resource guard: {0}")]
    Resource(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the user's configuration rather than by the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Parameter(_) | Error::Json(_) => true,
            Error::Stage { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
