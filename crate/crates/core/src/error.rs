use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected} nodes, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("field is not even about x = 0 (max asymmetry {asymmetry:.3e})")]
    NotEven { asymmetry: f64 },

    #[error("singular tridiagonal system: zero pivot at row {row}")]
    SingularSystem { row: usize },

    #[error("cfl violation: dt = {dt:.3e} exceeds stable limit {limit:.3e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("blowup detected: max u = {max_u:.3e} exceeds ceiling {ceiling:.3e}")]
    Blowup { max_u: f64, ceiling: f64 },

    #[error("front collapse: domain width {width:.3e} fell below {threshold:.3e}")]
    FrontCollapse { width: f64, threshold: f64 },

    #[error("{field} not applicable: hypothesis {hypothesis} violated")]
    HypothesisViolated {
        field: &'static str,
        hypothesis: &'static str,
    },

    #[error("period map did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("at t = {t}: {source}")]
    AtTime { t: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn at(self, t: f64) -> Self {
        match self {
            e @ Error::AtTime { .. } => e,
            e => Error::AtTime {
                t,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with any time annotation stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures of the numerical scheme (CFL, blowup, collapse).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::CflViolation { .. }
                | Error::Blowup { .. }
                | Error::FrontCollapse { .. }
                | Error::SingularSystem { .. }
                | Error::NoConvergence { .. }
        )
    }
}
