use thiserror::Error;

/// Errors raised by the model, inversion, simulation and estimation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsbpError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Survival event has vanishing probability, so the conditional law is undefined.
    #[error("degenerate conditioning: extinction probability {p_zero} is indistinguishable from 1")]
    DegenerateConditioning { p_zero: f64 },

    /// The aliasing parameter required for a safe contour exceeds the configured cap.
    #[error("numerical instability: required aliasing parameter A = {required:.4e} exceeds cap {cap}")]
    Instability { required: f64, cap: f64 },

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("all fits failed: {0}")]
    AllFailed(String),

    #[error("all importance weights vanished ({failures} of {total} draws failed)")]
    ZeroWeights { failures: usize, total: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CsbpError {
    pub fn is_instability(&self) -> bool {
        matches!(self, CsbpError::Instability { .. })
    }
}

impl From<std::io::Error> for CsbpError {
    fn from(e: std::io::Error) -> Self {
        CsbpError::Io(e.to_string())
    }
}

impl From<csv::Error> for CsbpError {
    fn from(e: csv::Error) -> Self {
        CsbpError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CsbpError {
    fn from(e: serde_json::Error) -> Self {
        CsbpError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CsbpError>;
