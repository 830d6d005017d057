use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("threshold calibration failed: mean {target} not bracketed for L in [{lo}, {hi}]")]
    CalibrationFailure { target: f64, lo: f64, hi: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e}")]
    QuadratureNotConverged { a: f64, b: f64, error: f64 },

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("t = {t} exceeds the alias-free window of the frequency grid (max usable t = {max_t})")]
    WindowExceeded { t: f64, max_t: f64 },

    #[error("{censored} of {total} trials hit the step cap before absorption")]
    Censored { censored: usize, total: usize },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("autocorrelation truncated: |R| = {edge:e} at the last lag {tau}; extend the tau grid")]
    Truncation { edge: f64, tau: f64 },

    #[error("frequency grid too coarse: {0}")]
    Resolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {x}")))
    }
}
