use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}, requested {requested:e}")]
    Quadrature {
        estimate: f64,
        error: f64,
        requested: f64,
    },

    #[error("function is not unimodal on [{lo:e}, {hi:e}]; re-bracket")]
    NotUnimodal { lo: f64, hi: f64 },

    #[error("visibility undefined: {0}")]
    UndefinedVisibility(String),

    #[error("ill-posed inversion: forward residual {residual:e} exceeds {threshold:e}")]
    IllPosedInversion {
        residual: f64,
        threshold: f64,
        /// Best-effort pump frequency grid (rad/s).
        nu: Vec<f64>,
        /// Best-effort pump spectral intensity on `nu`.
        values: Vec<f64>,
    },

    #[error("malformed data at line {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
