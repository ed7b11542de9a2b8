use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The point (X, Y) lies outside the region where the Lagrangian is real.
    #[error("field point outside model domain: {what} (X = {x}, Y = {y})")]
    Domain { what: &'static str, x: f64, y: f64 },

    #[error("constitutive inversion did not converge after {iterations} iterations (residual {residual:e}){}", cell.map(|c| format!(" at cell {c}")).unwrap_or_default())]
    NoConvergence {
        iterations: usize,
        residual: f64,
        cell: Option<usize>,
    },

    /// Sampling bound reaches outside the region where the model is defined.
    #[error("field bound {bound} exceeds the safe bound {safe} of the model")]
    BoundOutsideDomain { bound: f64, safe: f64 },

    #[error("CFL condition violated: |dt| * speed / dz = {ratio} > 1")]
    CflViolation { ratio: f64 },

    /// Linearised system about the background has complex characteristic speeds.
    #[error("background state is not hyperbolic (characteristic speed with imaginary part {imag:e})")]
    NotHyperbolic { imag: f64 },

    #[error("centroid fit rejected: {0}")]
    Fit(String),

    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn with_cell(self, index: usize) -> Self {
        match self {
            Error::NoConvergence {
                iterations,
                residual,
                ..
            } => Error::NoConvergence {
                iterations,
                residual,
                cell: Some(index),
            },
            other => other,
        }
    }
}
