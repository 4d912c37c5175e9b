use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported BDF order {0}; expected 1, 2 or 3")]
    UnsupportedBdfOrder(usize),

    #[error("invalid tableau field `{field}`: {reason}")]
    InvalidTableau { field: &'static str, reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("eigendecomposition failed for p={p}, k={k}, alpha=({alpha_a}, {alpha_d}): {reason}")]
    Eigen {
        p: usize,
        k: f64,
        alpha_a: f64,
        alpha_d: f64,
        reason: String,
    },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("pseudo-step unstable: spectral radius of P is {rho} at dtau={dtau}")]
    PseudoUnstable { rho: f64, dtau: f64 },

    #[error("f_tau exceeds CFL at level {level}: spectral radius of P is {rho} at dtau={dtau}")]
    LevelUnstable { level: usize, rho: f64, dtau: f64 },

    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("no stable pseudo step in the search bracket [{lo:e}, {hi:e}]")]
    NoStableStep { lo: f64, hi: f64 },

    #[error("diverged at pseudo step {step}: norm grew by a factor {growth:e}")]
    Diverged { step: usize, growth: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
