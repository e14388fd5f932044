use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("{func} did not converge after {iterations} iterations")]
    Convergence {
        func: &'static str,
        iterations: usize,
    },

    /// The quadrature ran out of panels; the best estimate is kept.
    #[error(
        "tolerance not met after {panels} panels: estimate {value_re:e}{value_im:+e}i, \
         error bound {abs_error:e}"
    )]
    ToleranceNotMet {
        value_re: f64,
        value_im: f64,
        abs_error: f64,
        panels: usize,
    },

    #[error("non-finite integrand value at x = {at:e}")]
    NonFinite { at: f64 },

    #[error("result of {func} is not representable: log-magnitude {log_magnitude:e}")]
    Overflow {
        func: &'static str,
        log_magnitude: f64,
    },

    #[error("invalid sampling geometry: {0}")]
    InvalidGeometry(String),

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("insufficient overlap between samples and density grid: {0}")]
    InsufficientOverlap(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
