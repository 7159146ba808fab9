use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("propagation diverged at t = {time}: {reason}")]
    Divergence { time: f64, reason: String },

    #[error("hierarchy depth did not converge below {tolerance:.1e} up to depth {max_depth} (residual {residual:.3e})")]
    DepthNotConverged {
        max_depth: usize,
        tolerance: f64,
        residual: f64,
    },

    #[error("Riccati solution blew up at t = {time} (|F| = {magnitude:.3e})")]
    RiccatiBlowUp { time: f64, magnitude: f64 },
}
