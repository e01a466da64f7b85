use crate::flags::Flag;

/// Errors raised by geometric queries and checkers.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("singular-value gap at wall {index} is {gap:.3e}, below tolerance")]
    VanishingGap { index: usize, gap: f64 },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("determinant {0} differs from 1")]
    NotUnimodular(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("face type mismatch: {0}")]
    TypeMismatch(String),

    #[error("invalid face type: {0}")]
    InvalidFace(String),

    #[error("the zero vector has no direction")]
    ZeroVector,

    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),

    #[error("flag sequence did not settle; {} clusters observed", clusters.len())]
    Inconclusive { clusters: Vec<Flag> },

    #[error("enumeration of {0} words exceeds the budget")]
    BudgetExceeded(u64),

    #[error("transversality margin {0:.3e} is below the floor")]
    TransversalityTooSmall(f64),

    #[error("ping-pong verification failed for every power up to {0}")]
    PingPongFailed(u32),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
