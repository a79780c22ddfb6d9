use thiserror::Error;

/// Errors raised by state construction, filtering, protocols and pumping.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("Bell weights must be non-negative and sum to 1: {0:?}")]
    BadWeights([f64; 4]),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("concurrence spectrum is identically zero")]
    ZeroSpectrum,
    #[error("local filter annihilates the state (success probability {0:e})")]
    FilterAnnihilates(f64),
    #[error("state is a product state; no canonical form of interest")]
    ProductState,
    #[error("state cannot be filtered into LoMM form")]
    NotLoMMReducible,
    #[error("state is not entangled (concurrence {0:e})")]
    NotEntangled(f64),
    #[error("no one-sided filter lifts the fully entangled fraction above 1/2 (best {0})")]
    FilterSearchFailed(f64),
    #[error("post-selection has vanishing probability ({0:e})")]
    ZeroProbability(f64),
    #[error("target fidelity {target} unreachable (plateau at {reached} after {rounds} rounds)")]
    TargetUnreachable { target: f64, reached: f64, rounds: usize },
    #[error("pump channel has mu+ = mu- = 0")]
    DegenerateChannel,
}

pub type Result<T> = std::result::Result<T, Error>;
