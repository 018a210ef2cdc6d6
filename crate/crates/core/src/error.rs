use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid element for {model}: {detail}")]
    InvalidElement { model: String, detail: String },

    #[error("group model mismatch: {left} vs {right}")]
    ModelMismatch { left: String, right: String },

    /// Support or element budget exhausted. `reached` is the largest radius
    /// (for balls) or convolution power (for measures) that completed.
    #[error("budget exceeded while computing {what}: limit {limit}, completed up to {reached}")]
    BudgetExceeded {
        what: String,
        limit: usize,
        reached: usize,
    },

    #[error("{operation} is not supported for the {family} family")]
    UnsupportedFamily { family: String, operation: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("measure is not admissible: {0}")]
    NotAdmissible(String),

    #[error("relator {relator} violated (residual {residual:.3e})")]
    RelatorViolation { relator: String, residual: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:.3e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("internal consistency check failed for {what}: {left} vs {right}")]
    Consistency { what: String, left: f64, right: f64 },

    #[error("spectral band [{lower}, {upper}] is empty; nearest eigenvalues {nearest:?}")]
    EmptyBand {
        lower: f64,
        upper: f64,
        nearest: Vec<f64>,
    },

    #[error("need at least {needed} data points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("parse error in {field}: {detail}")]
    Parse { field: String, detail: String },
}

impl Error {
    pub(crate) fn parse(field: &str, detail: impl Into<String>) -> Self {
        Error::Parse {
            field: field.to_string(),
            detail: detail.into(),
        }
    }
}
