use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("degenerate thermometry: P_bsb = {p_bsb} must exceed P_rsb = {p_rsb}")]
    DegenerateThermometry { p_bsb: f64, p_rsb: f64 },

    #[error("insufficient data: need at least {needed} usable points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no crossover temperature exists for beta = {beta} (requires beta > 1)")]
    NoCrossover { beta: f64 },

    #[error("{value} is outside the tabulated range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error(
        "quadrature did not converge on [{a}, {b}]: estimate {estimate:e}, \
         error estimate {error:e} after {intervals} subintervals"
    )]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("fit did not converge after {iterations} iterations (best parameters {best:?})")]
    NonConvergence { iterations: usize, best: [f64; 3] },

    #[error("fit is rank deficient (Jacobian condition number {condition:e}); data does not constrain all parameters")]
    RankDeficient { condition: f64 },

    #[error("requested {requested} samples exceeds the configured cap of {cap}")]
    ResourceLimit { requested: u64, cap: u64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV: {0}")]
    Csv(String),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the numbers themselves rather than by
    /// malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::NonConvergence { .. }
                | Error::RankDeficient { .. }
                | Error::Domain(_)
                | Error::NoCrossover { .. }
        )
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
