use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid Lindbladian: {0}")]
    InvalidSpec(String),

    #[error("unstable dynamics: max Im(E) = {max_im:e}, no steady state")]
    Unstable { max_im: f64 },

    #[error("{0} requires a U(1)-symmetric model (K_eff = Q = 0)")]
    U1Breaking(&'static str),

    #[error("defective effective Hamiltonian (cluster condition number {0:e})")]
    Defective(f64),

    #[error("enumeration of {count} indices exceeds cap {cap}")]
    TooMany { count: u128, cap: usize },

    #[error("series not converged at l_max = {l_max}; last term magnitude {last_term:e}")]
    SeriesNonConvergence { l_max: u32, last_term: f64 },

    #[error("propagator is a delta distribution at this time (zero variance)")]
    DeltaDistribution,

    #[error("argument outside supported envelope: {0}")]
    Envelope(String),

    #[error("oracle dimension {dim} exceeds cap {cap}")]
    OracleCap { dim: usize, cap: usize },

    #[error("truncation headroom violated: top Fock levels carry weight {0:e}")]
    Headroom(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("model file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
